#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fracdiff/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Time-fractional diffusion solver"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Solve the problem described by a JSON config");
  run->add_option("config", run_config, "config file")->required();

  std::string suite;
  std::string verify_config;
  std::string report = "-";
  bool flip = false;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", suite, "contour | kernels | constant_order | laplace_identity | weak_form | all")
      ->required();
  verify->add_option("config", verify_config, "config file (default: built-in benchmark)");
  verify->add_option("--report", report, "JSON report path ('-' for stdout)");
  verify->add_flag("--flip-atom-sign", flip, "debug: pair source atoms with the wrong sign");

  std::string dump_config;
  std::string dump_out = "-";
  auto* dump = app.add_subcommand("dump-contour", "Write contour nodes and weights as CSV");
  dump->add_option("config", dump_config, "config file")->required();
  dump->add_option("-o,--output", dump_out, "CSV path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*run) return fracdiff::run_command(run_config, std::cerr);
  if (*verify) {
    std::optional<std::filesystem::path> cfg;
    if (!verify_config.empty()) cfg = verify_config;
    return fracdiff::verify_command(suite, cfg, flip, report, std::cout, std::cerr);
  }
  return fracdiff::dump_contour_command(dump_config, dump_out, std::cout, std::cerr);
}

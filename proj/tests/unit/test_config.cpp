#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fracdiff/config.hpp"
#include "fracdiff/error.hpp"

using namespace fracdiff;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fracdiff_test_" + name + "_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  return dir;
}

json minimal() {
  return json{{"domain", {{"dimension", 1}, {"extents", {1.0}}, {"subdivisions", 10}}},
              {"kernel", {{"type", "constant_order"}, {"beta", 0.5}}},
              {"output", {{"times", {0.5, 1.0}}}}};
}

void expect_config_error(const json& j) {
  try {
    parse_config(j);
    FAIL() << j.dump();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config) << e.what();
  }
}

}  // namespace

TEST(Fields, Presets) {
  const Mesh m = build_mesh(DomainSpec{}, 10);
  EXPECT_EQ(evaluate_field(2.5, m), Vec::Constant(9, 2.5));
  EXPECT_EQ(evaluate_field("constant 3", m), Vec::Constant(9, 3.0));
  EXPECT_EQ(evaluate_field("zero", m), Vec::Zero(9));
  const Vec zones = evaluate_field("two_zones 1|2 split at x=0.5", m);
  EXPECT_EQ(zones[0], 1.0);
  EXPECT_EQ(zones[8], 2.0);
  const Vec s = evaluate_field("sin_mode 2", m);
  EXPECT_NEAR(s[1], std::sin(2 * std::numbers::pi * 0.2), 1e-15);
  const Vec g = evaluate_field("gaussian 0.5 0.1", m);
  EXPECT_NEAR(g[4], 1.0, 1e-15);
  const Vec ind = evaluate_field("indicator 0.25 0.55", m);
  EXPECT_EQ(ind.sum(), 3.0);
  EXPECT_EQ(evaluate_field(json::array({1, 2, 3, 4, 5, 6, 7, 8, 9}), m)[8], 9.0);
  EXPECT_THROW(evaluate_field("wobble 3", m), Error);
  EXPECT_THROW(evaluate_field(json::array({1, 2}), m), Error);
}

TEST(Fields, TwoDimensional) {
  const Mesh m = build_mesh(DomainSpec{2, {1.0, 1.0}}, 4);
  const Vec g = evaluate_field("gaussian 0.5 0.5 0.2", m);
  EXPECT_NEAR(g[4], 1.0, 1e-15);
  EXPECT_EQ(evaluate_field("indicator 0 0.3 0 1", m).sum(), 3.0);
}

TEST(Fields, Csv) {
  const auto dir = scratch_dir("csv");
  {
    std::ofstream f(dir / "a.csv");
    f << "node,value\n";
    for (int i = 0; i < 9; ++i) f << i << "," << 1.0 + i << "\n";
  }
  const Mesh m = build_mesh(DomainSpec{}, 10);
  const Vec v = evaluate_field(json{{"csv", "a.csv"}}, m, dir);
  EXPECT_EQ(v[3], 4.0);
  EXPECT_THROW(evaluate_field(json{{"csv", "missing.csv"}}, m, dir), Error);
  fs::remove_all(dir);
}

TEST(Config, MinimalDefaults) {
  const auto rc = parse_config(minimal());
  EXPECT_EQ(rc.mesh.size(), 9u);
  EXPECT_EQ(rc.u0, Vec::Zero(9));
  EXPECT_EQ(rc.solver.contour.tol, 1e-8);
  EXPECT_EQ(rc.output.times.size(), 2u);
  EXPECT_EQ(rc.verification.seed, 20240611u);
  EXPECT_EQ(constant_order_of(*rc.solver.kernel), 0.5);
}

TEST(Config, ResolvedRoundTrip) {
  json j = minimal();
  j["sources"] = {{"atoms", {{{"t", 0.2}, {"order", 1}, {"profile", "sin_mode 1"}}}},
                  {"regular", {{"dt", 0.1}, {"horizon", 1.0}, {"time_profile", "linear 1 2"}, {"space_profile", "constant 1"}}}};
  j["output"]["times"] = {{"start", 0.0}, {"stop", 1.0}, {"count", 5}};
  const auto a = parse_config(j);
  const auto b = parse_config(a.resolved);
  EXPECT_EQ(a.resolved, b.resolved);
  EXPECT_EQ(a.output.times, b.output.times);
  ASSERT_TRUE(b.sources.regular);
  EXPECT_EQ(a.sources.regular->samples, b.sources.regular->samples);
  EXPECT_EQ(a.output.times.back(), 1.0);
  EXPECT_NEAR(a.sources.regular->value(0.5)[0], 2.0, 1e-14);
}

TEST(Config, KernelTypes) {
  json j = minimal();
  j["kernel"] = {{"type", "multi_term"}, {"terms", {{{"alpha", 0.3}, {"rho", 1.0}}, {{"alpha", 0.6}, {"rho", "constant 2"}}}}};
  EXPECT_EQ(parse_config(j).solver.kernel->family(), KernelFamily::MultiTerm);
  j["kernel"] = {{"type", "distributed"}, {"mu", "constant 1"}};
  EXPECT_EQ(parse_config(j).solver.kernel->family(), KernelFamily::Distributed);
  j["kernel"] = {{"type", "variable_order"}, {"alpha", "two_zones 0.4|0.5 split at x=0.5"}};
  EXPECT_EQ(parse_config(j).solver.kernel->family(), KernelFamily::VariableOrder);
}

TEST(Config, Errors) {
  json j = minimal();
  j["kernel"]["type"] = "tempered";
  expect_config_error(j);
  j = minimal();
  j["output"]["times"] = {1.0, 0.5};
  expect_config_error(j);
  j = minimal();
  j.erase("domain");
  expect_config_error(j);
  j = minimal();
  j["threads"] = -3;
  expect_config_error(j);
  j = minimal();
  j["sources"] = {{"atoms", {{{"t", 0.2}, {"order", 9}, {"profile", "zero"}}}}};
  expect_config_error(j);
  EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
}

TEST(Config, BenchmarkMatchesShippedFile) {
  const auto shipped = load_config(fs::path(FRACDIFF_CONFIG_DIR) / "benchmark.json");
  const auto builtin = parse_config(benchmark_config());
  EXPECT_EQ(shipped.output.times, builtin.output.times);
  EXPECT_EQ(shipped.u0, builtin.u0);
  EXPECT_EQ(shipped.mesh.size(), 199u);
}

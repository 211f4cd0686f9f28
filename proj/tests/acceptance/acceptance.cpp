// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.
//
//   fracdiff_acceptance <fracdiff executable> <configs dir> <bad configs dir>

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracdiff/config.hpp"
#include "fracdiff/contour.hpp"
#include "fracdiff/kernels.hpp"
#include "fracdiff/solver.hpp"
#include "fracdiff/suites.hpp"
#include "fracdiff/verify.hpp"

using namespace fracdiff;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kC1Error = 1e-5;
constexpr double kC1Seconds = 30.0;
constexpr double kC2Error = 1e-8;
constexpr double kC2Reduction = 10.0;
constexpr double kC2Floor = 1e-12;
constexpr double kC4Order = 1.8;
constexpr double kC5Residual = 1e-4;
constexpr double kC6Residual = 1e-3;
constexpr double kC7Error = 1e-10;
constexpr double kC8Spread = 5e-3;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
  std::cout << "C" << id << " " << title << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// e^{x^2} erfc(x), so that E_{1/2}(-x) = erfcx(x).
double erfcx(double x) {
  if (x < 20.0) return std::exp(x * x) * std::erfc(x);
  const double r = 1.0 / (2.0 * x * x);
  double term = 1.0, sum = 1.0;
  for (int n = 1; n < 12; ++n) {
    term *= -(2.0 * n - 1.0) * r;
    sum += term;
  }
  return sum / (x * std::sqrt(std::numbers::pi));
}

Outcome criterion1(const RunConfig& rc) {
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory traj = solve_trajectory(rc.solver, rc.output.times, rc.u0, rc.sources);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto op = assemble_operator(rc.mesh, rc.solver.a, rc.solver.q);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(op.matrix())};
  const Eigen::VectorXd coeff = es.eigenvectors().transpose() * rc.u0;
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    Eigen::VectorXd modal(coeff.size());
    for (long k = 0; k < coeff.size(); ++k) modal[k] = erfcx(es.eigenvalues()[k] * std::sqrt(t)) * coeff[k];
    const Vec ref = es.eigenvectors() * modal;
    worst = std::max(worst, (traj.values[i] - ref).norm() / ref.norm());
  }
  return {worst <= kC1Error && seconds <= kC1Seconds,
          "max relative L2 error " + sci(worst) + " (budget " + sci(kC1Error) + "), solve " + sci(seconds) + " s"};
}

Outcome criterion2() {
  const auto q = build_contour(auto_params(0.1, 10.0, 1e-8), 0.1, 1e-8);
  double worst = 0.0;
  for (double t : {0.1, 1.0, 10.0}) {
    const double h = std::abs(inverse_laplace_scalar([](cplx p) { return 1.0 / p; }, t, q).real() - 1.0);
    const double r = std::abs(inverse_laplace_scalar([](cplx p) { return 1.0 / (p * p); }, t, q).real() - t) / t;
    worst = std::max({worst, h, r});
  }
  std::vector<double> errs;
  bool reduces = true;
  for (int n = 16; n <= 128; n *= 2) {
    const auto qn = build_contour(0.75 * std::numbers::pi, 1.0, n, n / 2, 1.0, 1e-14);
    errs.push_back(std::abs(inverse_laplace_scalar([](cplx p) { return 1.0 / p; }, 1.0, qn).real() - 1.0));
    const std::size_t k = errs.size();
    if (k > 1 && errs[k - 2] > kC2Floor && errs[k - 1] > errs[k - 2] / kC2Reduction) reduces = false;
  }
  std::string seq;
  for (double e : errs) seq += (seq.empty() ? "" : " ") + sci(e);
  return {worst <= kC2Error && reduces, "worst error " + sci(worst) + ", doubling errors " + seq};
}

Outcome criterion3(const RunConfig& rc) {
  SourceTerm F;
  F.atoms.push_back({0.5, 0, evaluate_field("sin_mode 1", rc.mesh)});
  const std::vector<double> times{0.1, 0.3, 0.5, 1.0};
  const auto traj = solve_trajectory(rc.solver, times, Vec::Zero(long(rc.mesh.size())), F);
  bool exact = true;
  for (int i = 0; i < 3; ++i) {
    for (long n = 0; n < traj.values[std::size_t(i)].size(); ++n) exact = exact && traj.values[std::size_t(i)][n] == 0.0;
  }
  const double after = traj.values[3].norm();
  return {exact && after > 0.0, std::string(exact ? "bitwise zero" : "nonzero") + " at t = 0.1, 0.3, 0.5; |u(1)| = " + sci(after)};
}

Outcome criterion4(const RunConfig& rc) {
  const Vec f = evaluate_field("sin_mode 1", rc.mesh) + 0.5 * evaluate_field("sin_mode 2", rc.mesh);
  SourceTerm d0, d1;
  d0.atoms.push_back({0.5, 0, f});
  d1.atoms.push_back({0.5, 1, f});
  SolverConfig cfg = rc.solver;
  cfg.contour.tol = 1e-12;
  cfg.contour.t_min = 0.2;
  cfg.contour.t_max = 0.5;
  const double t = 0.8;
  const Vec zero = Vec::Zero(long(rc.mesh.size()));
  const Vec exact = solve_trajectory(cfg, {t}, zero, d1).values[0];
  std::vector<double> errs;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    const auto tr = solve_trajectory(cfg, {t - h, t + h}, zero, d0);
    errs.push_back(((tr.values[1] - tr.values[0]) / (2 * h) - exact).norm());
  }
  const double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
  return {std::min(o1, o2) >= kC4Order,
          "errors " + sci(errs[0]) + " " + sci(errs[1]) + " " + sci(errs[2]) + ", orders " + sci(o1) + " " + sci(o2)};
}

Outcome from_suite(const std::vector<CheckResult>& checks) {
  Outcome o{true, ""};
  for (const auto& c : checks) {
    o.pass = o.pass && c.pass && !c.skipped;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += c.name + " " + sci(c.value) + (c.detail.empty() ? "" : " [" + c.detail + "]");
  }
  return o;
}

Outcome criterion5(const RunConfig& rc) {
  auto checks = run_suite("laplace_identity", rc);
  Outcome o = from_suite(checks);
  for (const auto& c : checks) {
    if (c.budget != kC5Residual && c.budget != 0.0) o.pass = false;
  }
  return o;
}

Outcome criterion6(const RunConfig& rc) {
  const auto checks = run_suite("weak_form", rc);
  Outcome o = from_suite(checks);
  for (const auto& c : checks) {
    if (c.name == "residual" && c.value > kC6Residual) o.pass = false;
  }
  const auto flipped = run_suite("weak_form", rc, SuiteOptions{true});
  bool flip_fails = false;
  for (const auto& c : flipped) flip_fails = flip_fails || !c.pass;
  o.pass = o.pass && flip_fails;
  o.detail += flip_fails ? "; flipped sign fails" : "; flipped sign passes";
  return o;
}

Outcome criterion7() {
  DistributedKernel d;
  d.mu = {1.0, 1.0};
  const auto k = KernelSpec::distributed(d, 1);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> lr(-2.0, 2.0), arg(-3.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const cplx p = std::polar(std::pow(10.0, lr(rng)), arg(rng));
    for (const cplx z : {p, std::conj(p)}) {
      const cplx exact = (z - 1.0) / (z * std::log(z));
      worst = std::max(worst, std::abs(kernel_laplace(k, z, 0) - exact) / std::abs(exact));
    }
  }
  return {worst <= kC7Error, "max relative error " + sci(worst) + " over 20 points"};
}

// L1 scheme for d^beta u + lambda u = 0, written out independently.
double l1_decay(double beta, double lambda, double T, int steps) {
  const double dt = T / steps;
  const double c = std::pow(dt, -beta) / std::tgamma(2.0 - beta);
  std::vector<double> b(std::size_t(steps) + 1), u(std::size_t(steps) + 1);
  for (int j = 0; j <= steps; ++j) b[std::size_t(j)] = std::pow(j + 1.0, 1 - beta) - std::pow(double(j), 1 - beta);
  u[0] = 1.0;
  for (int n = 1; n <= steps; ++n) {
    double hist = b[std::size_t(n - 1)] * u[0];
    for (int j = 1; j < n; ++j) hist += (b[std::size_t(n - j - 1)] - b[std::size_t(n - j)]) * u[std::size_t(j)];
    u[std::size_t(n)] = c * hist / (c + lambda);
  }
  return u.back();
}

Outcome criterion8(const RunConfig& rc) {
  const auto op = assemble_operator(rc.mesh, rc.solver.a, rc.solver.q);
  const double lambda = discrete_eigenvalue(rc.mesh, 1);
  const Vec phi = discrete_eigenvector(rc.mesh, 1);
  const auto kernel = KernelSpec::constant_order(0.5, rc.mesh.size());
  ContourSettings cs;
  cs.tol = 1e-10;
  const auto traj = solve_trajectory(kernel, op, cs, {1.0}, phi, SourceTerm{}, 1);
  const double contour = traj.values[0].dot(phi);
  const double ml = erfcx(lambda);
  const double l1 = l1_decay(0.5, lambda, 1.0, 1000);
  const double lib = l1_scheme_oracle(0.5, lambda, 1.0, std::vector<double>(1001, 0.0), [] {
                       std::vector<double> t;
                       for (int i = 0; i <= 1000; ++i) t.push_back(i * 1e-3);
                       return t;
                     }()).back();
  const double spread = std::max({std::abs(contour - ml), std::abs(contour - l1), std::abs(ml - l1)});
  return {spread <= kC8Spread && std::abs(lib - l1) <= 1e-12 && std::abs(mittag_leffler(0.5, 1.0, -lambda) - ml) <= 1e-12,
          "contour " + sci(contour) + ", Mittag-Leffler " + sci(ml) + ", L1 " + sci(l1) + ", spread " + sci(spread)};
}

int run_cli(const fs::path& cli, const fs::path& cwd, const std::string& args, const std::string& env = {}) {
  const std::string cmd = "cd '" + cwd.string() + "' && " + env + " '" + cli.string() + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fracdiff_acceptance_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome criterion9(const fs::path& cli, const fs::path& bad_dir) {
  Outcome o{true, ""};
  for (const char* name : {"bad_variable_order.json", "bad_distributed.json", "bad_multi_term.json"}) {
    const auto dir = fresh_dir("c9");
    const int code = run_cli(cli, dir, "run '" + (bad_dir / name).string() + "'");
    bool wrote_csv = false;
    for (const auto& e : fs::directory_iterator(dir)) wrote_csv = wrote_csv || e.path().extension() == ".csv";
    o.pass = o.pass && code == 2 && !wrote_csv;
    o.detail += std::string(o.detail.empty() ? "" : ", ") + name + " exit " + std::to_string(code) +
                (wrote_csv ? " (csv written)" : "");
    fs::remove_all(dir);
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

Outcome criterion10(const fs::path& cli, const fs::path& configs) {
  Outcome o{true, ""};
  for (const auto& [config, csv] : {std::pair{"benchmark.json", "trajectory.csv"},
                                    std::pair{"variable_order_atoms.json", "vo_trajectory.csv"}}) {
    std::string outputs[2];
    int codes[2];
    int i = 0;
    for (const char* threads : {"1", "4"}) {
      const auto dir = fresh_dir(std::string("c10_") + threads);
      codes[i] = run_cli(cli, dir, "run '" + (configs / config).string() + "'", std::string("FRACDIFF_THREADS=") + threads);
      outputs[i] = slurp(dir / csv);
      fs::remove_all(dir);
      ++i;
    }
    const bool same = codes[0] == 0 && codes[1] == 0 && !outputs[0].empty() && outputs[0] == outputs[1];
    o.pass = o.pass && same;
    o.detail += std::string(o.detail.empty() ? "" : ", ") + config + (same ? " identical" : " differs") + " (" +
                std::to_string(outputs[0].size()) + " bytes)";
  }
  return o;
}

template <class F>
Outcome guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: fracdiff_acceptance <fracdiff executable> <configs dir> <bad configs dir>\n";
    return 2;
  }
  const fs::path cli = fs::absolute(argv[1]);
  const fs::path configs = fs::absolute(argv[2]);
  const fs::path bad = fs::absolute(argv[3]);
  const RunConfig bench = load_config(configs / "benchmark.json");

  report(1, "constant-order equivalence", guarded([&] { return criterion1(bench); }));
  report(2, "scalar contour fidelity", guarded([] { return criterion2(); }));
  report(3, "causality", guarded([&] { return criterion3(bench); }));
  report(4, "delta-derivative consistency", guarded([&] { return criterion4(bench); }));
  report(5, "Laplace-domain identity", guarded([&] { return criterion5(bench); }));
  report(6, "weak formulation", guarded([&] { return criterion6(bench); }));
  report(7, "distributed-order closed form", guarded([] { return criterion7(); }));
  report(8, "cross-oracle triangle", guarded([&] { return criterion8(bench); }));
  report(9, "admissibility gates", guarded([&] { return criterion9(cli, bad); }));
  report(10, "reproducibility across worker counts", guarded([&] { return criterion10(cli, configs); }));
  return failures == 0 ? 0 : 1;
}

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fracdiff/config.hpp"
#include "fracdiff/contour.hpp"
#include "fracdiff/error.hpp"
#include "fracdiff/kernels.hpp"
#include "fracdiff/parallel.hpp"
#include "fracdiff/solver.hpp"
#include "fracdiff/suites.hpp"
#include "fracdiff/verify.hpp"

namespace py = pybind11;
using namespace fracdiff;

namespace {

RunConfig parse(const std::string& text, const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j, base_dir);
}

py::dict solve_json(const std::string& text, const std::string& base_dir) {
  const RunConfig rc = parse(text, base_dir);
  Trajectory traj;
  {
    py::gil_scoped_release release;
    traj = solve_trajectory(rc.solver, rc.output.times, rc.u0, rc.sources);
  }
  Eigen::MatrixXd values(long(traj.times.size()), long(rc.mesh.size()));
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    values.row(long(i)) = (traj.times[i] == 0.0 && traj.initial.size() ? traj.initial : traj.values[i]).transpose();
  }
  Eigen::MatrixXd coords(long(rc.mesh.size()), rc.mesh.dimension);
  for (std::size_t n = 0; n < rc.mesh.size(); ++n) {
    const auto x = rc.mesh.coordinates(n);
    for (int a = 0; a < rc.mesh.dimension; ++a) coords(long(n), a) = x[std::size_t(a)];
  }
  const auto& d = traj.diagnostics;
  py::dict diag;
  diag["imaginary_remainder"] = d.imaginary_remainder;
  diag["conjugation_probe"] = d.conjugation_probe;
  diag["max_probe_residual"] = d.max_probe_residual;
  diag["contour_nodes"] = d.contour_nodes;
  diag["stored_nodes"] = d.stored_nodes;
  diag["window"] = py::make_tuple(d.window_t_min, d.window_t_max);
  py::dict out;
  out["times"] = traj.times;
  out["values"] = values;
  out["coordinates"] = coords;
  out["diagnostics"] = diag;
  out["resolved_config"] = rc.resolved.dump();
  return out;
}

py::list verify_json(const std::string& suite, const std::string& text, const std::string& base_dir,
                     bool flip_atom_sign) {
  const RunConfig rc = text.empty() ? parse_config(benchmark_config()) : parse(text, base_dir);
  std::vector<CheckResult> checks;
  {
    py::gil_scoped_release release;
    checks = run_suite(suite, rc, SuiteOptions{flip_atom_sign});
  }
  py::list out;
  for (const auto& c : checks) {
    py::dict r;
    r["suite"] = c.suite;
    r["name"] = c.name;
    r["value"] = c.value;
    r["budget"] = c.budget;
    r["pass"] = c.pass;
    r["skipped"] = c.skipped;
    r["detail"] = c.detail;
    out.append(r);
  }
  return out;
}

py::dict diagnostics_dict(const KernelDiagnostics& d) {
  py::dict r;
  r["ok"] = d.ok;
  r["violations"] = d.violations;
  r["alpha_min"] = d.alpha_min;
  r["alpha_max"] = d.alpha_max;
  r["rho_min"] = d.rho_min;
  r["rho_max"] = d.rho_max;
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-fractional diffusion solver core";

  static py::exception<Error> base(m, "FracdiffError");
  static py::exception<Error> admissibility(m, "AdmissibilityError", base.ptr());
  static py::exception<Error> numerical(m, "NumericalError", base.ptr());
  static py::exception<Error> configuration(m, "ConfigError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Admissibility: py::set_error(admissibility, e.what()); break;
        case ErrorKind::Numerical: py::set_error(numerical, e.what()); break;
        case ErrorKind::Config: py::set_error(configuration, e.what()); break;
        default: py::set_error(base, e.what());
      }
    }
  });

  py::enum_<KernelFamily>(m, "KernelFamily")
      .value("VariableOrder", KernelFamily::VariableOrder)
      .value("Distributed", KernelFamily::Distributed)
      .value("MultiTerm", KernelFamily::MultiTerm);

  py::class_<KernelSpec>(m, "Kernel")
      .def_static("constant_order", &KernelSpec::constant_order, py::arg("beta"), py::arg("nodes") = 1)
      .def_static("variable_order", &KernelSpec::variable_order, py::arg("alpha"))
      .def_static(
          "distributed",
          [](std::vector<double> mu, std::size_t nodes, double alpha0, double epsilon, int quadrature_nodes) {
            return KernelSpec::distributed(DistributedKernel{std::move(mu), alpha0, epsilon, quadrature_nodes}, nodes);
          },
          py::arg("mu"), py::arg("nodes") = 1, py::arg("alpha0") = 0.5, py::arg("epsilon") = 0.1,
          py::arg("quadrature_nodes") = 64)
      .def_static(
          "multi_term",
          [](const std::vector<std::pair<double, Vec>>& terms) {
            MultiTermKernel k;
            for (const auto& [alpha, rho] : terms) k.terms.push_back({alpha, rho});
            return KernelSpec::multi_term(std::move(k));
          },
          py::arg("terms"), "terms: list of (alpha, rho) with rho given per node")
      .def_property_readonly("family", &KernelSpec::family)
      .def_property_readonly("nodes", &KernelSpec::node_count)
      .def("value", [](const KernelSpec& k, double t, std::size_t node) { return kernel_value(k, t, node); },
           py::arg("t"), py::arg("node") = 0)
      .def("laplace", [](const KernelSpec& k, cplx p, std::size_t node) { return kernel_laplace(k, p, node); },
           py::arg("p"), py::arg("node") = 0)
      .def("validate", [](const KernelSpec& k) { return diagnostics_dict(validate_kernel(k)); });

  m.def("mittag_leffler", &mittag_leffler, py::arg("beta"), py::arg("gamma"), py::arg("z"));

  m.def(
      "contour",
      [](double t_min, double t_max, double tol) {
        const auto q = build_contour(auto_params(t_min, t_max, tol), t_min, tol);
        std::vector<cplx> p, w;
        for (const auto& n : q.nodes()) {
          p.push_back(n.p);
          w.push_back(n.w);
        }
        return py::make_tuple(p, w);
      },
      py::arg("t_min"), py::arg("t_max"), py::arg("tol") = 1e-8,
      "Nodes and weights of the default contour for the window [t_min, t_max].");

  m.def(
      "inverse_laplace",
      [](const std::function<cplx(cplx)>& f, double t, double t_min, double t_max, double tol) {
        const auto q = build_contour(auto_params(t_min, t_max, tol), t_min, tol);
        return inverse_laplace_scalar(f, t, q);
      },
      py::arg("f"), py::arg("t"), py::arg("t_min"), py::arg("t_max"), py::arg("tol") = 1e-8);

  m.def("solve_json", &solve_json, py::arg("config"), py::arg("base_dir") = "");
  m.def("verify_json", &verify_json, py::arg("suite"), py::arg("config") = "", py::arg("base_dir") = "",
        py::arg("flip_atom_sign") = false);
  m.def("benchmark_config", [] { return benchmark_config().dump(); });
  m.def("suite_names", &suite_names);
  m.def("resolve_workers", &resolve_workers, py::arg("requested") = 0);
}

#include "fracdiff/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <regex>
#include <sstream>

#include "fracdiff/error.hpp"

namespace fracdiff {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw config_error(where + ": " + what);
}

std::vector<std::vector<double>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(path.string(), "cannot open");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    }
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    bool numeric = true;
    while (ls >> tok) {
      if (tok[0] == '#') break;
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header
      fail(path.string(), "non-numeric row '" + line + "'");
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<double> numbers_after(const std::string& text, const std::string& where, std::size_t skip) {
  std::istringstream is(text);
  std::string tok;
  for (std::size_t i = 0; i < skip; ++i) is >> tok;
  std::vector<double> out;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) fail(where, "bad number '" + tok + "'");
    } catch (const std::invalid_argument&) {
      fail(where, "bad number '" + tok + "'");
    }
  }
  return out;
}

Vec preset_field(const std::string& text, const Mesh& mesh, const std::string& where) {
  const auto n = static_cast<Eigen::Index>(mesh.size());
  std::istringstream is(text);
  std::string name;
  is >> name;
  Vec out(n);
  const int d = mesh.dimension;
  if (name == "zero") return Vec::Zero(n);
  if (name == "constant") {
    const auto v = numbers_after(text, where, 1);
    if (v.size() != 1) fail(where, "expected 'constant c'");
    return Vec::Constant(n, v[0]);
  }
  if (name == "two_zones") {
    static const std::regex re(R"(two_zones\s+(\S+)\s*\|\s*(\S+)\s+split\s+at\s+x\s*=\s*(\S+)\s*)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) fail(where, "expected 'two_zones a|b split at x=s'");
    double a = 0.0, b = 0.0, s = 0.0;
    try {
      a = std::stod(m[1]);
      b = std::stod(m[2]);
      s = std::stod(m[3]);
    } catch (const std::exception&) {
      fail(where, "bad number in '" + text + "'");
    }
    for (Eigen::Index i = 0; i < n; ++i) out[i] = mesh.coordinates(std::size_t(i))[0] < s ? a : b;
    return out;
  }
  if (name == "sin_mode") {
    const auto v = numbers_after(text, where, 1);
    if (v.empty() || v.size() > 2) fail(where, "expected 'sin_mode k [l]'");
    const double k = v[0], l = v.size() == 2 ? v[1] : v[0];
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto x = mesh.coordinates(std::size_t(i));
      double s = std::sin(k * std::numbers::pi * x[0] / mesh.extents[0]);
      if (d == 2) s *= std::sin(l * std::numbers::pi * x[1] / mesh.extents[1]);
      out[i] = s;
    }
    return out;
  }
  if (name == "gaussian") {
    const auto v = numbers_after(text, where, 1);
    if (v.size() != std::size_t(d) + 1) fail(where, d == 1 ? "expected 'gaussian c w'" : "expected 'gaussian cx cy w'");
    const double w = v.back();
    if (!(w > 0.0)) fail(where, "gaussian width must be positive");
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto x = mesh.coordinates(std::size_t(i));
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) r2 += (x[a] - v[a]) * (x[a] - v[a]);
      out[i] = std::exp(-r2 / (w * w));
    }
    return out;
  }
  if (name == "indicator") {
    const auto v = numbers_after(text, where, 1);
    if (v.size() != 2 * std::size_t(d)) fail(where, d == 1 ? "expected 'indicator a b'" : "expected 'indicator a b c d'");
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto x = mesh.coordinates(std::size_t(i));
      bool inside = true;
      for (int a = 0; a < d; ++a) inside = inside && x[a] >= v[2 * a] && x[a] <= v[2 * a + 1];
      out[i] = inside ? 1.0 : 0.0;
    }
    return out;
  }
  fail(where, "unknown preset '" + name + "'");
}

// Fields given as {"csv": path} are replaced in `node` by their values.
Vec field_at(json& node, const Mesh& mesh, const fs::path& base, const std::string& where) {
  Vec v = evaluate_field(node, mesh, base);
  if (!v.allFinite()) fail(where, "non-finite values");
  if (node.is_object()) node = std::vector<double>(v.data(), v.data() + v.size());
  return v;
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where, std::string("missing '") + key + "'");
  if (!j.at(key).is_number()) fail(where, std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

double number_or(json& j, const char* key, double fallback) {
  if (!j.contains(key)) j[key] = fallback;
  if (!j.at(key).is_number()) fail(key, "must be a number");
  return j.at(key).get<double>();
}

int integer_or(json& j, const char* key, int fallback) {
  if (!j.contains(key)) j[key] = fallback;
  if (!j.at(key).is_number_integer()) fail(key, "must be an integer");
  return j.at(key).get<int>();
}

KernelSpec parse_kernel(json& k, const Mesh& mesh, const fs::path& base) {
  if (!k.is_object() || !k.contains("type")) fail("kernel", "expected an object with 'type'");
  const std::string type = k.at("type").get<std::string>();
  const std::size_t N = mesh.size();
  if (type == "constant_order") {
    return KernelSpec::constant_order(number(k, "beta", "kernel"), N);
  }
  if (type == "variable_order") {
    if (!k.contains("alpha")) fail("kernel", "variable_order needs 'alpha'");
    return KernelSpec::variable_order(field_at(k["alpha"], mesh, base, "kernel.alpha"));
  }
  if (type == "multi_term") {
    if (!k.contains("terms") || !k["terms"].is_array() || k["terms"].empty()) {
      fail("kernel", "multi_term needs a non-empty 'terms' list");
    }
    MultiTermKernel m;
    for (std::size_t j = 0; j < k["terms"].size(); ++j) {
      json& t = k["terms"][j];
      const std::string where = "kernel.terms[" + std::to_string(j) + "]";
      if (!t.contains("rho")) t["rho"] = 1.0;
      m.terms.push_back({number(t, "alpha", where), field_at(t["rho"], mesh, base, where + ".rho")});
    }
    if (k.contains("c0")) m.declared_lower = number(k, "c0", "kernel");
    if (k.contains("C0")) m.declared_upper = number(k, "C0", "kernel");
    return KernelSpec::multi_term(std::move(m));
  }
  if (type == "distributed") {
    DistributedKernel d;
    if (!k.contains("mu")) fail("kernel", "distributed needs 'mu'");
    json& mu = k["mu"];
    if (mu.is_number()) {
      d.mu = {mu.get<double>(), mu.get<double>()};
    } else if (mu.is_string()) {
      const auto v = numbers_after(mu.get<std::string>(), "kernel.mu", 1);
      if (mu.get<std::string>().rfind("constant", 0) != 0 || v.size() != 1) fail("kernel.mu", "expected 'constant c'");
      d.mu = {v[0], v[0]};
    } else if (mu.is_array()) {
      d.mu = mu.get<std::vector<double>>();
    } else if (mu.is_object() && mu.contains("csv")) {
      const auto rows = read_csv(resolve_path(base, mu["csv"].get<std::string>()));
      if (rows.size() < 2) fail("kernel.mu", "need at least two (alpha, weight) rows");
      const double step = 1.0 / double(rows.size() - 1);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 2) fail("kernel.mu", "rows must be (alpha, weight)");
        if (std::abs(rows[i][0] - double(i) * step) > 1e-9) {
          fail("kernel.mu", "alpha samples must be uniform on [0, 1]");
        }
        d.mu.push_back(rows[i][1]);
      }
    } else {
      fail("kernel.mu", "expected a number, 'constant c', a sample list or {\"csv\": path}");
    }
    mu = d.mu;
    d.alpha0 = number_or(k, "alpha0", d.alpha0);
    d.epsilon = number_or(k, "epsilon", d.epsilon);
    d.quadrature_nodes = integer_or(k, "quadrature_nodes", d.quadrature_nodes);
    try {
      return KernelSpec::distributed(std::move(d), N);
    } catch (const Error& e) {
      fail("kernel", e.what());
    }
  }
  fail("kernel", "unknown type '" + type + "'");
}

double time_profile(const std::string& text, double s) {
  std::istringstream is(text);
  std::string name;
  is >> name;
  const auto v = numbers_after(text, "sources.regular.time_profile", 1);
  if (name == "constant" && v.size() == 1) return v[0];
  if (name == "linear" && v.size() == 2) return v[0] + v[1] * s;
  if (name == "sin" && v.size() == 1) return std::sin(v[0] * s);
  if (name == "exp" && v.size() == 1) return std::exp(-v[0] * s);
  fail("sources.regular.time_profile", "expected 'constant c', 'linear a b', 'sin w' or 'exp r'");
}

RegularSource parse_regular(json& r, const Mesh& mesh, const fs::path& base) {
  const auto N = static_cast<Eigen::Index>(mesh.size());
  RegularSource reg;
  if (r.contains("csv")) {
    const auto rows = read_csv(resolve_path(base, r["csv"].get<std::string>()));
    if (rows.size() < 2) fail("sources.regular", "need at least two time rows");
    reg.dt = rows[1][0] - rows[0][0];
    reg.samples.resize(N, Eigen::Index(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != std::size_t(N) + 1) fail("sources.regular", "rows must be (t, one value per node)");
      if (std::abs(rows[i][0] - double(i) * reg.dt) > 1e-9 * std::max(1.0, reg.dt * double(i))) {
        fail("sources.regular", "sample times must be uniform from 0");
      }
      for (Eigen::Index n = 0; n < N; ++n) reg.samples(n, Eigen::Index(i)) = rows[i][std::size_t(n) + 1];
    }
  } else if (r.contains("samples")) {
    reg.dt = number(r, "dt", "sources.regular");
    const auto cols = r["samples"].get<std::vector<std::vector<double>>>();
    if (cols.size() < 2) fail("sources.regular", "need at least two time samples");
    reg.samples.resize(N, Eigen::Index(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i].size() != std::size_t(N)) fail("sources.regular", "sample vectors have the wrong length");
      for (Eigen::Index n = 0; n < N; ++n) reg.samples(n, Eigen::Index(i)) = cols[i][std::size_t(n)];
    }
  } else {
    reg.dt = number(r, "dt", "sources.regular");
    const double horizon = number(r, "horizon", "sources.regular");
    if (!(reg.dt > 0.0) || !(horizon > 0.0)) fail("sources.regular", "dt and horizon must be positive");
    if (!r.contains("time_profile") || !r.contains("space_profile")) {
      fail("sources.regular", "expected {\"csv\"}, {\"dt\", \"samples\"} or time_profile x space_profile");
    }
    const auto M = static_cast<Eigen::Index>(std::ceil(horizon / reg.dt - 1e-9)) + 1;
    const Vec space = field_at(r["space_profile"], mesh, base, "sources.regular.space_profile");
    const std::string tp = r["time_profile"].get<std::string>();
    reg.samples.resize(N, M);
    for (Eigen::Index i = 0; i < M; ++i) reg.samples.col(i) = time_profile(tp, double(i) * reg.dt) * space;
    return reg;
  }
  if (!(reg.dt > 0.0)) fail("sources.regular", "dt must be positive");
  // Inline as samples so the resolved config does not depend on files.
  std::vector<std::vector<double>> cols(std::size_t(reg.samples.cols()));
  for (Eigen::Index i = 0; i < reg.samples.cols(); ++i) {
    cols[std::size_t(i)].assign(reg.samples.col(i).data(), reg.samples.col(i).data() + N);
  }
  r = json{{"dt", reg.dt}, {"samples", cols}};
  return reg;
}

std::vector<double> parse_times(const json& t) {
  if (t.is_array()) return t.get<std::vector<double>>();
  if (!t.is_object()) fail("output.times", "expected a list or {start, stop, step|count}");
  const double start = t.value("start", 0.0);
  const double stop = number(t, "stop", "output.times");
  std::size_t count = 0;
  if (t.contains("count")) {
    count = t.at("count").get<std::size_t>();
  } else {
    const double step = number(t, "step", "output.times");
    if (!(step > 0.0)) fail("output.times", "step must be positive");
    count = static_cast<std::size_t>(std::llround((stop - start) / step)) + 1;
  }
  if (count < 1) fail("output.times", "empty time list");
  std::vector<double> out(count);
  const double h = count > 1 ? (stop - start) / double(count - 1) : 0.0;
  for (std::size_t i = 0; i < count; ++i) out[i] = start + double(i) * h;
  if (count > 1) out.back() = stop;
  return out;
}

}  // namespace

Vec evaluate_field(const json& spec, const Mesh& mesh, const fs::path& base) {
  const auto n = static_cast<Eigen::Index>(mesh.size());
  if (spec.is_number()) return Vec::Constant(n, spec.get<double>());
  if (spec.is_string()) return preset_field(spec.get<std::string>(), mesh, spec.get<std::string>());
  if (spec.is_array()) {
    const auto v = spec.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(v.size()) != n) {
      fail("field", "expected " + std::to_string(n) + " nodal values, got " + std::to_string(v.size()));
    }
    return Eigen::Map<const Vec>(v.data(), n);
  }
  if (spec.is_object() && spec.contains("csv")) {
    const fs::path path = resolve_path(base, spec.at("csv").get<std::string>());
    const auto rows = read_csv(path);
    Vec out = Vec::Constant(n, std::numeric_limits<double>::quiet_NaN());
    for (const auto& row : rows) {
      if (row.size() != 2) fail(path.string(), "rows must be (node, value)");
      const auto node = static_cast<Eigen::Index>(row[0]);
      if (double(node) != row[0] || node < 0 || node >= n) fail(path.string(), "bad node index");
      out[node] = row[1];
    }
    if (!out.allFinite()) fail(path.string(), "missing or non-finite node values");
    return out;
  }
  fail("field", "expected a number, a preset string, a nodal list or {\"csv\": path}");
}

RunConfig parse_config(const json& input, const fs::path& base) {
  if (!input.is_object()) fail("config", "top level must be an object");
  RunConfig rc;
  json r = input;
  try {
    // domain
    json& dom = r["domain"];
    if (!dom.is_object()) fail("domain", "missing");
    rc.solver.domain.dimension = integer_or(dom, "dimension", 1);
    if (rc.solver.domain.dimension != 1 && rc.solver.domain.dimension != 2) fail("domain", "dimension must be 1 or 2");
    if (!dom.contains("extents")) dom["extents"] = std::vector<double>(std::size_t(rc.solver.domain.dimension), 1.0);
    const auto ext = dom["extents"].get<std::vector<double>>();
    if (ext.size() != std::size_t(rc.solver.domain.dimension)) fail("domain", "one extent per dimension");
    for (std::size_t i = 0; i < ext.size(); ++i) rc.solver.domain.extents[i] = ext[i];
    if (!dom.contains("subdivisions")) fail("domain", "missing 'subdivisions'");
    rc.solver.n = dom["subdivisions"].get<int>();
    try {
      rc.mesh = build_mesh(rc.solver.domain, rc.solver.n);
    } catch (const Error& e) {
      fail("domain", e.what());
    }
    const Mesh& mesh = rc.mesh;

    // coefficients
    json& coef = r["coefficients"];
    if (coef.is_null()) coef = json::object();
    if (!coef.contains("a")) coef["a"] = "constant 1";
    if (!coef.contains("q")) coef["q"] = "constant 0";
    const Vec a = field_at(coef["a"], mesh, base, "coefficients.a");
    Vec a2 = a;
    if (coef.contains("a2")) a2 = field_at(coef["a2"], mesh, base, "coefficients.a2");
    rc.solver.a = mesh.dimension == 2 ? diagonal_field(a, a2) : diagonal_field(a);
    rc.solver.q = field_at(coef["q"], mesh, base, "coefficients.q");

    // kernel
    if (!r.contains("kernel")) fail("kernel", "missing");
    rc.solver.kernel = parse_kernel(r["kernel"], mesh, base);

    // contour
    json& c = r["contour"];
    if (c.is_null()) c = json::object();
    rc.solver.contour.tol = number_or(c, "tol", 1e-8);
    if (!(rc.solver.contour.tol > 0.0 && rc.solver.contour.tol < 1.0)) fail("contour", "tol must be in (0, 1)");
    if (c.contains("theta") || c.contains("delta") || c.contains("nodes_per_ray") || c.contains("nodes_arc")) {
      ContourParams p;
      p.theta = number(c, "theta", "contour");
      p.delta = number(c, "delta", "contour");
      p.nodes_per_ray = integer_or(c, "nodes_per_ray", p.nodes_per_ray);
      p.nodes_arc = integer_or(c, "nodes_arc", p.nodes_arc);
      rc.solver.contour.params = p;
    }
    if (c.contains("t_min")) rc.solver.contour.t_min = number(c, "t_min", "contour");
    if (c.contains("t_max")) rc.solver.contour.t_max = number(c, "t_max", "contour");
    rc.solver.k_max = integer_or(c, "k_max", kDefaultMaxDerivative);

    // initial data
    if (!r.contains("initial")) r["initial"] = "zero";
    rc.u0 = field_at(r["initial"], mesh, base, "initial");

    // sources
    json& src = r["sources"];
    if (src.is_null()) src = json::object();
    if (src.contains("atoms")) {
      for (std::size_t j = 0; j < src["atoms"].size(); ++j) {
        json& at = src["atoms"][j];
        const std::string where = "sources.atoms[" + std::to_string(j) + "]";
        Atom atom;
        atom.time = number(at, "t", where);
        if (!at.contains("order")) at["order"] = 0;
        atom.order = at["order"].get<int>();
        if (!at.contains("profile")) fail(where, "missing 'profile'");
        atom.profile = field_at(at["profile"], mesh, base, where + ".profile");
        rc.sources.atoms.push_back(std::move(atom));
      }
    }
    if (src.contains("regular") && !src["regular"].is_null()) {
      rc.sources.regular = parse_regular(src["regular"], mesh, base);
    }
    try {
      rc.sources.validate(mesh.size(), rc.solver.k_max);
    } catch (const Error& e) {
      fail("sources", e.what());
    }

    // output
    json& out = r["output"];
    if (out.is_null()) out = json::object();
    if (!out.contains("times")) fail("output", "missing 'times'");
    rc.output.times = parse_times(out["times"]);
    for (std::size_t i = 0; i < rc.output.times.size(); ++i) {
      if (!std::isfinite(rc.output.times[i]) || rc.output.times[i] < 0.0) fail("output.times", "times must be >= 0");
      if (i > 0 && !(rc.output.times[i] > rc.output.times[i - 1])) fail("output.times", "times must be increasing");
    }
    if (!out.contains("csv")) out["csv"] = "trajectory.csv";
    if (!out.contains("report")) out["report"] = "report.json";
    rc.output.csv = out["csv"].is_null() ? "" : out["csv"].get<std::string>();
    rc.output.report = out["report"].is_null() ? "" : out["report"].get<std::string>();
    if (out.contains("matrix_market") && !out["matrix_market"].is_null()) {
      rc.output.matrix_market = out["matrix_market"].get<std::string>();
    }

    // verification
    json& ver = r["verification"];
    if (ver.is_null()) ver = json::object();
    if (ver.contains("p_samples")) {
      rc.verification.p_samples.clear();
      for (const auto& p : ver["p_samples"]) {
        if (p.is_number()) {
          rc.verification.p_samples.emplace_back(p.get<double>(), 0.0);
        } else {
          const auto v = p.get<std::vector<double>>();
          if (v.size() != 2) fail("verification.p_samples", "entries are numbers or [re, im]");
          rc.verification.p_samples.emplace_back(v[0], v[1]);
        }
      }
    } else {
      json list = json::array();
      for (const auto& p : rc.verification.p_samples) list.push_back({p.real(), p.imag()});
      ver["p_samples"] = list;
    }
    json& bump = ver["bump"];
    if (bump.is_null()) bump = json::object();
    rc.verification.bump_center = number_or(bump, "center", rc.verification.bump_center);
    rc.verification.bump_width = number_or(bump, "width", rc.verification.bump_width);
    if (!ver.contains("seed")) ver["seed"] = rc.verification.seed;
    rc.verification.seed = ver["seed"].get<std::uint64_t>();
    if (!ver.contains("oracle")) ver["oracle"] = true;
    rc.verification.oracle = ver["oracle"].get<bool>();

    // execution
    if (!r.contains("threads")) r["threads"] = "auto";
    if (r["threads"].is_string()) {
      if (r["threads"].get<std::string>() != "auto") fail("threads", "expected a positive integer or \"auto\"");
      rc.solver.threads = 0;
    } else {
      const int t = r["threads"].get<int>();
      if (t < 1) fail("threads", "expected a positive integer or \"auto\"");
      rc.solver.threads = unsigned(t);
    }
    if (!r.contains("deterministic")) r["deterministic"] = true;
    rc.solver.deterministic = r["deterministic"].get<bool>();
  } catch (const json::exception& e) {
    fail("config", e.what());
  }
  rc.resolved = std::move(r);
  return rc;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(path.string(), "cannot open config");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    fail(path.string(), e.what());
  }
  return parse_config(j, path.parent_path());
}

json benchmark_config() {
  return json{
      {"domain", {{"dimension", 1}, {"extents", {1.0}}, {"subdivisions", 200}}},
      {"coefficients", {{"a", "constant 1"}, {"q", "constant 0"}}},
      {"kernel", {{"type", "multi_term"}, {"terms", {{{"alpha", 0.5}, {"rho", "constant 1"}}}}}},
      {"contour", {{"tol", 1e-8}}},
      {"initial", "sin_mode 1"},
      {"output", {{"times", {0.1, 0.5, 1.0}}, {"csv", "trajectory.csv"}, {"report", "report.json"}}},
  };
}

std::optional<double> constant_order_of(const KernelSpec& spec) {
  if (const auto* m = spec.as_multi_term()) {
    if (m->terms.size() == 1 && (m->terms[0].rho.array() == 1.0).all()) return m->terms[0].alpha;
  }
  if (const auto* v = spec.as_variable_order()) {
    if (v->alpha.size() > 0 && spec.spatially_uniform()) return v->alpha(0);
  }
  return std::nullopt;
}

}  // namespace fracdiff

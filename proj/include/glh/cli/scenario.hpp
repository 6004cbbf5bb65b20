#pragma once

// Scenario files (JSON). Everything is validated up front and every problem
// is reported with its field path before any task runs.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../grid.hpp"
#include "expression.hpp"

namespace glh::cli {

using json = nlohmann::json;

struct Issue {
  std::string path;
  std::string message;
};

class ValidationError : public Error {
public:
  explicit ValidationError(std::vector<Issue> issues) : Error(summary(issues)), issues_(std::move(issues)) {}
  const std::vector<Issue>& issues() const noexcept { return issues_; }

private:
  static std::string summary(const std::vector<Issue>& issues) {
    std::string s = std::to_string(issues.size()) + " validation error(s)";
    for (const auto& i : issues) s += "\n  " + i.path + ": " + i.message;
    return s;
  }
  std::vector<Issue> issues_;
};

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"energy", "el_residual", "certify_theorem", "orbit", "pfaff",
                                              "pseudolinear", "group_lagrangian", "maxwell", "einstein", "curvature"};
  return names;
}

struct GridSpec {
  std::vector<Interval> extents;
  std::vector<int> nodes;
  std::vector<bool> periodic;
  int stencil = 2;

  int dim() const { return static_cast<int>(extents.size()); }

  ChartGrid build(std::optional<int> stencil_override = {}) const {
    return ChartGrid(extents, nodes, periodic, stencil_override.value_or(stencil));
  }
};

/// Metric on a chart: a builtin tag or a matrix of expressions in one point variable.
struct MetricSpec {
  std::string builtin;  // "identity", "round-sphere", or empty for `entries`
  double radius = 1.0;
  int dim = 0;
  std::vector<std::vector<Expression>> entries;

  Mat eval(std::span<const double> p) const {
    if (builtin == "identity") return Mat::Identity(dim, dim);
    if (builtin == "round-sphere") {
      Mat m = Mat::Zero(2, 2);
      m(0, 0) = radius * radius;
      m(1, 1) = radius * radius * std::sin(p[0]) * std::sin(p[0]);
      return m;
    }
    Mat m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](p);
    return m;
  }
};

/// Scalar on a tangent bundle: expression in (point, direction) or a builtin.
struct ScalarSpec {
  enum class Kind { zero, expression, pfaff, orbit, log_conformal } kind = Kind::zero;
  Expression expr;
  std::vector<double> A;  // log-conformal covector
  bool present = false;
};

/// Vector of expressions in one point variable.
struct VectorSpec {
  std::vector<Expression> components;

  Vec eval(std::span<const double> p) const {
    Vec v(static_cast<Eigen::Index>(components.size()));
    for (std::size_t k = 0; k < components.size(); ++k) v(static_cast<Eigen::Index>(k)) = components[k](p);
    return v;
  }
  int size() const { return static_cast<int>(components.size()); }
};

struct MapSpec {
  VectorSpec components;  // in `a`
  std::vector<double> seam;
};

struct ConnectionSpec {
  std::string kind = "zero";  // zero | fiber_covector | base_form
  VectorSpec field;           // A(a) or xi(x)
};

struct Generator {
  VectorSpec xi;  // in `x`
  VectorSpec A;   // in `a`
};

struct SystemSpec {
  std::string kind;  // orbit | pfaff | pseudolinear | group
  std::vector<Generator> generators;
};

struct Tolerances {
  double tol_gap = 1e-6;
  double tol_defect = 1e-3;
  double eps_sing = 1e-8;
  double fd_step = 1e-6;
  double fiber_step = 1e-4;
};

struct Check {
  std::string quantity;
  std::optional<double> max;
  std::optional<double> min;
};

struct TaskSpec {
  std::string task;
  std::string path;  // "tasks[k]"
  json params;
  std::vector<Check> checks;
};

struct Scenario {
  std::string name;
  std::string description;
  std::uint64_t seed = 0;
  GridSpec grid;
  MetricSpec phi;
  int n = 0;
  std::optional<MetricSpec> psi;
  std::optional<MapSpec> map;
  ScalarSpec sigma;     // sigma(a, b) on TM
  ScalarSpec tau;       // tau(x, y) on TN
  ScalarSpec gl_sigma;  // sigma(x, y) of the conformal GL space over M
  ConnectionSpec P;
  std::optional<SystemSpec> system;
  Tolerances tol;
  std::vector<double> direction;
  std::vector<TaskSpec> tasks;
  json source;
};

namespace detail {

class Reader {
public:
  std::vector<Issue> issues;

  void error(const std::string& path, const std::string& msg) { issues.push_back({path, msg}); }

  const json* member(const json& obj, const std::string& key, const std::string& path, bool required) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) error(join(path, key), "required field is missing");
      return nullptr;
    }
    return &*it;
  }

  static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
  static std::string index(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

  std::optional<double> number(const json& j, const std::string& path) {
    if (!j.is_number()) {
      error(path, "expected a number");
      return {};
    }
    return j.get<double>();
  }

  std::optional<int> integer(const json& j, const std::string& path, int lo = INT32_MIN) {
    if (!j.is_number_integer()) {
      error(path, "expected an integer");
      return {};
    }
    const int v = j.get<int>();
    if (v < lo) {
      error(path, "must be at least " + std::to_string(lo));
      return {};
    }
    return v;
  }

  std::optional<std::string> string(const json& j, const std::string& path) {
    if (!j.is_string()) {
      error(path, "expected a string");
      return {};
    }
    return j.get<std::string>();
  }

  std::optional<bool> boolean(const json& j, const std::string& path) {
    if (!j.is_boolean()) {
      error(path, "expected true or false");
      return {};
    }
    return j.get<bool>();
  }

  std::vector<double> numbers(const json& j, const std::string& path, std::optional<std::size_t> size = {}) {
    std::vector<double> out;
    if (!j.is_array()) {
      error(path, "expected an array of numbers");
      return out;
    }
    if (size && j.size() != *size) error(path, "expected " + std::to_string(*size) + " entries, got " + std::to_string(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k)
      if (auto v = number(j[k], index(path, k))) out.push_back(*v);
    return out;
  }

  /// Parses a string (or number) as an expression and probes it with sample values.
  std::optional<Expression> expression(const json& j, const std::string& path, const std::vector<std::string>& vars,
                                       const std::vector<int>& dims) {
    Expression e;
    try {
      if (j.is_number()) e = Expression::constant(j.get<double>(), vars);
      else if (j.is_string()) e = Expression::parse(j.get<std::string>(), vars);
      else {
        error(path, "expected an expression string or a number");
        return {};
      }
    } catch (const ExpressionError& ex) {
      error(path, ex.what());
      return {};
    }
    std::vector<std::vector<double>> probe;
    for (int d : dims) {
      std::vector<double> p(static_cast<std::size_t>(std::max(d, 0)));
      for (std::size_t k = 0; k < p.size(); ++k) p[k] = 0.3 + 0.1 * static_cast<double>(k);
      probe.push_back(std::move(p));
    }
    std::vector<std::span<const double>> spans(probe.begin(), probe.end());
    try {
      e.scalar(Bindings(spans.data(), spans.size()));
    } catch (const ExpressionError& ex) {
      error(path, ex.what());
      return {};
    }
    return e;
  }

  std::optional<VectorSpec> vector_spec(const json& j, const std::string& path, const std::string& var, int var_dim,
                                        std::optional<int> size) {
    if (!j.is_array()) {
      error(path, "expected an array of expressions");
      return {};
    }
    if (size && static_cast<int>(j.size()) != *size) {
      error(path, "expected " + std::to_string(*size) + " components, got " + std::to_string(j.size()));
      return {};
    }
    VectorSpec v;
    bool ok = true;
    for (std::size_t k = 0; k < j.size(); ++k) {
      auto e = expression(j[k], index(path, k), {var}, {var_dim});
      if (e) v.components.push_back(std::move(*e));
      else ok = false;
    }
    if (!ok) return {};
    return v;
  }

  std::optional<MetricSpec> metric(const json& j, const std::string& path, const std::string& var, int dim) {
    MetricSpec m;
    m.dim = dim;
    if (j.is_string()) {
      m.builtin = j.get<std::string>();
    } else if (j.is_object() && j.contains("builtin")) {
      auto b = string(j["builtin"], join(path, "builtin"));
      if (!b) return {};
      m.builtin = *b;
      if (j.contains("radius"))
        if (auto r = number(j["radius"], join(path, "radius"))) m.radius = *r;
    } else if (j.is_array()) {
      if (static_cast<int>(j.size()) != dim) {
        error(path, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
        return {};
      }
      bool ok = true;
      for (std::size_t i = 0; i < j.size(); ++i) {
        auto row = vector_spec(j[i], index(path, i), var, dim, dim);
        if (row) m.entries.push_back(std::move(row->components));
        else ok = false;
      }
      if (!ok) return {};
      return m;
    } else {
      error(path, "expected a builtin name, {\"builtin\": ...} or a matrix of expressions");
      return {};
    }
    if (m.builtin != "identity" && m.builtin != "round-sphere") {
      error(path, "unknown builtin metric '" + m.builtin + "' (identity, round-sphere)");
      return {};
    }
    if (m.builtin == "round-sphere" && dim != 2) {
      error(path, "round-sphere needs a 2-dimensional chart");
      return {};
    }
    return m;
  }

  ScalarSpec scalar(const json& j, const std::string& path, const std::vector<std::string>& vars,
                    const std::vector<int>& dims, const std::set<std::string>& builtins) {
    ScalarSpec s;
    s.present = true;
    if (j.is_object()) {
      const json* b = member(j, "builtin", path, true);
      if (!b) return s;
      auto name = string(*b, join(path, "builtin"));
      if (!name) return s;
      if (!builtins.count(*name)) {
        std::string list;
        for (const auto& n : builtins) list += (list.empty() ? "" : ", ") + n;
        error(join(path, "builtin"), "unknown builtin '" + *name + "' (" + list + ")");
        return s;
      }
      if (*name == "zero") s.kind = ScalarSpec::Kind::zero;
      else if (*name == "pfaff") s.kind = ScalarSpec::Kind::pfaff;
      else if (*name == "orbit") s.kind = ScalarSpec::Kind::orbit;
      else if (*name == "log-conformal") {
        s.kind = ScalarSpec::Kind::log_conformal;
        if (const json* a = member(j, "A", path, true)) s.A = numbers(*a, join(path, "A"), static_cast<std::size_t>(dims[1]));
      }
      return s;
    }
    if (auto e = expression(j, path, vars, dims)) {
      s.kind = ScalarSpec::Kind::expression;
      s.expr = std::move(*e);
    }
    return s;
  }
};

inline std::set<std::string> allowed_params(const std::string& task) {
  static const std::map<std::string, std::set<std::string>> table{
      {"energy", {}},
      {"el_residual", {"form", "margin"}},
      {"certify_theorem", {"expect", "perturbations"}},
      {"orbit", {"x0", "step", "ladder", "perturbations"}},
      {"pfaff", {"margin", "perturbations"}},
      {"pseudolinear", {"tol_turning", "margin", "perturbations"}},
      {"group_lagrangian", {}},
      {"maxwell", {"stride", "y", "fiber_steps"}},
      {"einstein", {"K", "energy_momentum", "compare_riemann", "stride", "y"}},
      {"curvature", {"expected_scalar", "convention"}},
  };
  return table.at(task);
}

} // namespace detail

/// Parses and validates a scenario document. Throws ValidationError listing every issue.
inline Scenario parse_scenario(const json& doc) {
  detail::Reader r;
  Scenario s;
  s.source = doc;
  if (!doc.is_object()) throw ValidationError(std::vector<Issue>{{"$", "scenario must be a JSON object"}});

  for (auto it = doc.begin(); it != doc.end(); ++it) {
    static const std::set<std::string> known{"name",  "description", "seed",      "m_space", "n_space",
                                             "map",   "sigma",       "tau",       "gl_sigma", "connection_P",
                                             "system", "tolerances", "direction", "tasks"};
    if (!known.count(it.key())) r.error(it.key(), "unknown field");
  }

  if (const json* j = r.member(doc, "name", "", true))
    if (auto v = r.string(*j, "name")) s.name = *v;
  if (const json* j = r.member(doc, "description", "", false))
    if (auto v = r.string(*j, "description")) s.description = *v;
  if (const json* j = r.member(doc, "seed", "", false))
    if (auto v = r.integer(*j, "seed", 0)) s.seed = static_cast<std::uint64_t>(*v);

  // m_space
  int m = 0;
  if (const json* ms = r.member(doc, "m_space", "", true)) {
    const std::string p = "m_space";
    std::vector<double> lo, hi;
    if (const json* e = r.member(*ms, "extents", p, true)) {
      if (!e->is_array() || e->empty()) r.error(p + ".extents", "expected a non-empty array of [lo, hi] pairs");
      else
        for (std::size_t k = 0; k < e->size(); ++k) {
          auto pair = r.numbers((*e)[k], detail::Reader::index(p + ".extents", k), 2);
          if (pair.size() == 2) {
            if (!(pair[1] > pair[0])) r.error(detail::Reader::index(p + ".extents", k), "need lo < hi");
            s.grid.extents.push_back({pair[0], pair[1]});
          }
        }
    }
    m = s.grid.dim();
    if (const json* nn = r.member(*ms, "nodes", p, true)) {
      if (!nn->is_array() || static_cast<int>(nn->size()) != m) r.error(p + ".nodes", "expected one node count per axis");
      else
        for (std::size_t k = 0; k < nn->size(); ++k)
          if (auto v = r.integer((*nn)[k], detail::Reader::index(p + ".nodes", k), 5)) s.grid.nodes.push_back(*v);
    }
    s.grid.periodic.assign(static_cast<std::size_t>(m), false);
    if (const json* pp = r.member(*ms, "periodic", p, false)) {
      if (!pp->is_array() || static_cast<int>(pp->size()) != m) r.error(p + ".periodic", "expected one flag per axis");
      else
        for (std::size_t k = 0; k < pp->size(); ++k)
          if (auto v = r.boolean((*pp)[k], detail::Reader::index(p + ".periodic", k))) s.grid.periodic[k] = *v;
    }
    if (const json* so = r.member(*ms, "stencil", p, false))
      if (auto v = r.integer(*so, p + ".stencil")) {
        if (*v != 2 && *v != 4) r.error(p + ".stencil", "must be 2 or 4");
        else s.grid.stencil = *v;
      }
    const bool has_phi = ms->contains("phi"), has_gamma = ms->contains("gamma");
    if (has_phi && has_gamma) r.error(p, "give either phi or gamma, not both");
    else if (!has_phi && !has_gamma) r.error(p + ".phi", "required field is missing");
    else if (m > 0) {
      const std::string key = has_phi ? "phi" : "gamma";
      if (auto met = r.metric((*ms)[key], p + "." + key, "a", m)) s.phi = std::move(*met);
    }
  }

  // n_space
  if (const json* ns = r.member(doc, "n_space", "", false)) {
    if (const json* d = r.member(*ns, "dim", "n_space", true))
      if (auto v = r.integer(*d, "n_space.dim", 1)) s.n = *v;
    if (const json* ps = r.member(*ns, "psi", "n_space", false))
      if (s.n > 0)
        if (auto met = r.metric(*ps, "n_space.psi", "x", s.n)) s.psi = std::move(*met);
  }

  if (const json* j = r.member(doc, "map", "", false)) {
    if (s.n <= 0) r.error("map", "needs n_space.dim");
    else if (!j->is_object()) r.error("map", "expected an object with components");
    else if (const json* c = r.member(*j, "components", "map", true)) {
      if (auto v = r.vector_spec(*c, "map.components", "a", m, s.n)) {
        MapSpec mp{std::move(*v), {}};
        if (const json* seam = r.member(*j, "seam", "map", false))
          mp.seam = r.numbers(*seam, "map.seam", static_cast<std::size_t>(m * s.n));
        s.map = std::move(mp);
      }
    }
  }

  if (const json* j = r.member(doc, "sigma", "", false))
    s.sigma = r.scalar(*j, "sigma", {"a", "b"}, {m, m}, {"zero", "pfaff"});
  if (const json* j = r.member(doc, "tau", "", false))
    s.tau = r.scalar(*j, "tau", {"x", "y"}, {s.n, s.n}, {"zero", "orbit"});
  if (const json* j = r.member(doc, "gl_sigma", "", false))
    s.gl_sigma = r.scalar(*j, "gl_sigma", {"x", "y"}, {m, m}, {"zero", "log-conformal"});

  if (const json* j = r.member(doc, "connection_P", "", false)) {
    if (const json* k = r.member(*j, "kind", "connection_P", true))
      if (auto v = r.string(*k, "connection_P.kind")) {
        s.P.kind = *v;
        if (*v == "fiber_covector") {
          if (const json* f = r.member(*j, "A", "connection_P", true))
            if (auto vs = r.vector_spec(*f, "connection_P.A", "a", m, m)) s.P.field = std::move(*vs);
        } else if (*v == "base_form") {
          if (const json* f = r.member(*j, "xi", "connection_P", true))
            if (auto vs = r.vector_spec(*f, "connection_P.xi", "x", s.n, s.n)) s.P.field = std::move(*vs);
        } else if (*v != "zero") {
          r.error("connection_P.kind", "unknown kind '" + *v + "' (zero, fiber_covector, base_form)");
        }
      }
  }

  if (const json* j = r.member(doc, "system", "", false)) {
    SystemSpec sys;
    const std::string p = "system";
    if (const json* k = r.member(*j, "kind", p, true))
      if (auto v = r.string(*k, p + ".kind")) sys.kind = *v;
    auto read_xi = [&](const json& g, const std::string& path, Generator& gen) {
      if (const json* x = r.member(g, "xi", path, true))
        if (auto vs = r.vector_spec(*x, path + ".xi", "x", s.n, s.n)) gen.xi = std::move(*vs);
    };
    auto read_A = [&](const json& g, const std::string& path, Generator& gen) {
      if (const json* a = r.member(g, "A", path, true))
        if (auto vs = r.vector_spec(*a, path + ".A", "a", m, m)) gen.A = std::move(*vs);
    };
    if (sys.kind == "orbit") {
      Generator g;
      read_xi(*j, p, g);
      sys.generators.push_back(std::move(g));
    } else if (sys.kind == "pfaff") {
      Generator g;
      read_A(*j, p, g);
      sys.generators.push_back(std::move(g));
    } else if (sys.kind == "pseudolinear") {
      Generator g;
      read_xi(*j, p, g);
      read_A(*j, p, g);
      sys.generators.push_back(std::move(g));
    } else if (sys.kind == "group") {
      if (const json* gs = r.member(*j, "generators", p, true)) {
        if (!gs->is_array() || gs->empty()) r.error(p + ".generators", "expected a non-empty array");
        else
          for (std::size_t k = 0; k < gs->size(); ++k) {
            Generator g;
            const std::string gp = detail::Reader::index(p + ".generators", k);
            read_xi((*gs)[k], gp, g);
            read_A((*gs)[k], gp, g);
            sys.generators.push_back(std::move(g));
          }
      }
    } else if (!sys.kind.empty()) {
      r.error(p + ".kind", "unknown kind '" + sys.kind + "' (orbit, pfaff, pseudolinear, group)");
    }
    s.system = std::move(sys);
  }

  if (const json* j = r.member(doc, "tolerances", "", false)) {
    auto read = [&](const char* key, double& target) {
      if (const json* v = r.member(*j, key, "tolerances", false))
        if (auto d = r.number(*v, std::string("tolerances.") + key)) {
          if (!(*d > 0.0)) r.error(std::string("tolerances.") + key, "must be positive");
          else target = *d;
        }
    };
    read("tol_gap", s.tol.tol_gap);
    read("tol_defect", s.tol.tol_defect);
    read("eps_sing", s.tol.eps_sing);
    read("fd_step", s.tol.fd_step);
    read("fiber_step", s.tol.fiber_step);
  }

  if (const json* j = r.member(doc, "direction", "", false)) s.direction = r.numbers(*j, "direction", static_cast<std::size_t>(m));

  // tasks
  const json* tasks = r.member(doc, "tasks", "", true);
  if (tasks && (!tasks->is_array() || tasks->empty())) r.error("tasks", "expected a non-empty array");
  if (tasks && tasks->is_array()) {
    for (std::size_t k = 0; k < tasks->size(); ++k) {
      const std::string tp = detail::Reader::index("tasks", k);
      const json& t = (*tasks)[k];
      TaskSpec spec;
      spec.path = tp;
      if (t.is_string()) spec.task = t.get<std::string>();
      else if (t.is_object()) {
        if (const json* name = r.member(t, "task", tp, true))
          if (auto v = r.string(*name, tp + ".task")) spec.task = *v;
      } else {
        r.error(tp, "expected a task name or an object with a task field");
        continue;
      }
      if (spec.task.empty()) continue;
      if (std::find(task_names().begin(), task_names().end(), spec.task) == task_names().end()) {
        r.error(tp + ".task", "unknown task '" + spec.task + "'");
        continue;
      }
      spec.params = t.is_object() ? t : json::object();
      const auto allowed = detail::allowed_params(spec.task);
      for (auto it = spec.params.begin(); it != spec.params.end(); ++it) {
        const std::string& key = it.key();
        if (key == "task" || key == "checks" || key == "label") continue;
        if (!allowed.count(key)) r.error(tp + "." + key, "not a parameter of task '" + spec.task + "'");
      }
      if (spec.params.contains("checks")) {
        const json& c = spec.params["checks"];
        if (!c.is_object()) r.error(tp + ".checks", "expected an object of {quantity: {max|min: value}}");
        else
          for (auto it = c.begin(); it != c.end(); ++it) {
            Check chk{it.key(), {}, {}};
            const std::string cp = tp + ".checks." + it.key();
            if (!it->is_object() || it->empty()) {
              r.error(cp, "expected {\"max\": v} and/or {\"min\": v}");
              continue;
            }
            for (auto b = it->begin(); b != it->end(); ++b) {
              auto v = r.number(*b, cp + "." + b.key());
              if (b.key() == "max") chk.max = v;
              else if (b.key() == "min") chk.min = v;
              else r.error(cp + "." + b.key(), "expected max or min");
            }
            spec.checks.push_back(chk);
          }
      }
      s.tasks.push_back(std::move(spec));
    }
  }

  // Cross-field requirements of each task.
  const bool sys_kind_ok = s.system && !s.system->kind.empty();
  for (const TaskSpec& t : s.tasks) {
    const std::string& name = t.task;
    const std::string why = " (required by task '" + name + "', " + t.path + ")";
    const json& p = t.params;
    auto need_map = [&] {
      if (!s.map) r.error("map", "required field is missing" + why);
    };
    auto need_psi = [&] {
      if (!doc.contains("n_space")) r.error("n_space", "required field is missing" + why);
      else if (!s.psi) r.error("n_space.psi", "required field is missing" + why);
    };
    auto need_system = [&](std::set<std::string> kinds) {
      if (!s.system) {
        r.error("system", "required field is missing" + why);
        return;
      }
      if (sys_kind_ok && !kinds.count(s.system->kind)) {
        std::string list;
        for (const auto& k : kinds) list += (list.empty() ? "" : " or ") + k;
        r.error("system.kind", "must be " + list + why);
      }
    };
    auto int_param = [&](const char* key, int lo) {
      if (p.contains(key)) r.integer(p[key], t.path + "." + key, lo);
    };
    auto num_param = [&](const char* key) {
      if (p.contains(key)) r.number(p[key], t.path + "." + key);
    };
    auto perturb_param = [&] {
      if (!p.contains("perturbations")) return;
      const json& q = p["perturbations"];
      const std::string qp = t.path + ".perturbations";
      if (!q.is_object()) {
        r.error(qp, "expected {count, amplitude}");
        return;
      }
      if (const json* c = r.member(q, "count", qp, true)) r.integer(*c, qp + ".count", 0);
      if (const json* a = r.member(q, "amplitude", qp, true)) r.number(*a, qp + ".amplitude");
    };
    auto samples_param = [&] {
      int_param("stride", 1);
      if (p.contains("y")) r.numbers(p["y"], t.path + ".y", static_cast<std::size_t>(m));
    };

    if (name == "energy") {
      need_map();
      need_psi();
    } else if (name == "el_residual") {
      need_map();
      need_psi();
      int_param("margin", 0);
      if (p.contains("form")) {
        auto f = r.string(p["form"], t.path + ".form");
        if (f && *f != "general" && *f != "case_star" && *f != "case_double_star")
          r.error(t.path + ".form", "must be general, case_star or case_double_star");
        if (f && *f == "case_star" && s.P.kind != "fiber_covector")
          r.error("connection_P.kind", "case_star needs a fiber_covector connection" + why);
        if (f && *f == "case_double_star" && s.P.kind != "base_form")
          r.error("connection_P.kind", "case_double_star needs a base_form connection" + why);
      }
    } else if (name == "certify_theorem") {
      need_map();
      need_psi();
      need_system({"orbit", "pfaff", "pseudolinear", "group"});
      if (p.contains("expect")) r.boolean(p["expect"], t.path + ".expect");
      perturb_param();
    } else if (name == "orbit") {
      need_psi();
      need_system({"orbit"});
      if (m != 1) r.error("m_space.extents", "orbit needs a one-dimensional interval" + why);
      else if (s.grid.periodic.size() == 1 && s.grid.periodic[0]) r.error("m_space.periodic", "orbit needs a closed interval" + why);
      if (const json* x0 = r.member(p, "x0", t.path, true)) r.numbers(*x0, t.path + ".x0", static_cast<std::size_t>(s.n));
      num_param("step");
      if (p.contains("ladder")) {
        if (!p["ladder"].is_array()) r.error(t.path + ".ladder", "expected an array of node counts");
        else
          for (std::size_t k = 0; k < p["ladder"].size(); ++k)
            r.integer(p["ladder"][k], detail::Reader::index(t.path + ".ladder", k), 5);
      }
      perturb_param();
    } else if (name == "pfaff") {
      need_map();
      need_system({"pfaff"});
      if (s.n != 1) r.error("n_space.dim", "must be 1" + why);
      int_param("margin", 0);
      perturb_param();
    } else if (name == "pseudolinear") {
      need_map();
      need_psi();
      need_system({"pseudolinear"});
      num_param("tol_turning");
      int_param("margin", 0);
      perturb_param();
    } else if (name == "group_lagrangian") {
      need_map();
      need_psi();
      need_system({"group", "pseudolinear"});
    } else if (name == "maxwell") {
      samples_param();
      if (p.contains("fiber_steps")) r.numbers(p["fiber_steps"], t.path + ".fiber_steps");
    } else if (name == "einstein") {
      samples_param();
      num_param("K");
      if (p.contains("energy_momentum")) r.boolean(p["energy_momentum"], t.path + ".energy_momentum");
      if (p.contains("compare_riemann")) r.boolean(p["compare_riemann"], t.path + ".compare_riemann");
    } else if (name == "curvature") {
      num_param("expected_scalar");
      if (p.contains("convention")) {
        auto c = r.string(p["convention"], t.path + ".convention");
        if (c && *c != "last_slot" && *c != "third_slot") r.error(t.path + ".convention", "must be last_slot or third_slot");
      }
    }
  }
  if (s.sigma.kind == ScalarSpec::Kind::pfaff && !(s.system && (s.system->kind == "pfaff" || s.system->kind == "pseudolinear")))
    r.error("sigma.builtin", "pfaff needs a pfaff or pseudolinear system");
  if (s.tau.kind == ScalarSpec::Kind::orbit && !(s.system && s.system->kind == "orbit"))
    r.error("tau.builtin", "orbit needs an orbit system");

  if (!r.issues.empty()) throw ValidationError(std::move(r.issues));
  return s;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read scenario file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::vector<Issue>{{"$", std::string("not valid JSON: ") + e.what()}});
  }
}

} // namespace glh::cli

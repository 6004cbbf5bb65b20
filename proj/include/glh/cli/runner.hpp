#pragma once

// Executes the tasks of a validated scenario and assembles the report.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../field_equations.hpp"
#include "../interpretations.hpp"
#include "scenario.hpp"

namespace glh::cli {

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<int> stencil;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

struct TaskRecord {
  std::string task;
  std::string path;
  std::string status = "pass";  // pass | fail | error
  json scalars = json::object();
  json max_residuals = json::object();
  json certificate;
  std::vector<std::string> failures;
  std::vector<std::string> dumps;
  double wall_time = 0.0;

  void fail(std::string why) {
    if (status != "error") status = "fail";
    failures.push_back(std::move(why));
  }

  json to_json() const {
    json j{{"task", task},         {"path", path},       {"status", status},     {"scalars", scalars},
           {"max_residuals", max_residuals}, {"failures", failures}, {"wall_time_s", wall_time}};
    if (!certificate.is_null()) j["certificate"] = certificate;
    if (!dumps.empty()) j["dumps"] = dumps;
    return j;
  }
};

struct Report {
  std::string scenario;
  json environment;
  std::vector<TaskRecord> tasks;

  bool passed() const {
    for (const auto& t : tasks)
      if (t.status != "pass") return false;
    return true;
  }

  json to_json() const {
    json j{{"scenario", scenario}, {"environment", environment}, {"passed", passed()}, {"tasks", json::array()}};
    for (const auto& t : tasks) j["tasks"].push_back(t.to_json());
    return j;
  }
};

namespace detail {

inline std::span<const double> span_of(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

/// 17 significant digits, coordinates first, then components in lexicographic index order.
inline void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << std::setprecision(17);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
    out << '\n';
  }
}

inline std::vector<std::string> component_names(const std::string& name, const Shape& shape) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < shape.components(); ++c) {
    std::string s = name;
    for (int i : shape.unravel(c)) s += "_" + std::to_string(i);
    out.push_back(s);
  }
  return out;
}

inline json location(const ChartGrid& g, std::size_t node) { return json{{"node", node}, {"coords", g.coords(node)}}; }

inline std::string describe(const json& loc) {
  if (!loc.is_object()) return "";
  std::ostringstream os;
  os << std::setprecision(6);
  if (loc.contains("node")) os << " at node " << loc["node"].get<std::size_t>();
  if (loc.contains("coords")) os << " " << glh::detail::format_point(loc["coords"].get<std::vector<double>>());
  if (loc.contains("y")) os << " direction " << glh::detail::format_point(loc["y"].get<std::vector<double>>());
  return os.str();
}

/// Largest |value| over nodes at least `margin` nodes from a closed boundary.
inline json field_max(const Field& f, int margin = 0) {
  const ChartGrid& g = f.grid();
  double best = -1.0;
  std::size_t at = 0;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (g.boundary_distance(node) < margin) continue;
    for (std::size_t c = 0; c < f.components(); ++c) {
      const double v = std::abs(f(node, c));
      if (v > best || std::isnan(v)) {
        best = v;
        at = node;
        if (std::isnan(v)) break;
      }
    }
  }
  json j = location(g, at);
  j["value"] = best < 0.0 ? 0.0 : best;
  return j;
}

class Context {
public:
  Context(const Scenario& s, const RunOptions& opt)
      : s_(s), grid_(s.grid.build(opt.stencil)), seed_(opt.seed.value_or(s.seed)) {
    phi_ = sample_metric(grid_, [this](std::span<const double> a) { return s_.phi.eval(a); });
    if (s.psi) {
      const MetricSpec spec = *s.psi;
      psi_ = [spec](const Vec& x) { return spec.eval(span_of(x)); };
    } else {
      const int n = std::max(s.n, 1);
      psi_ = [n](const Vec&) { return Mat(Mat::Identity(n, n)); };
    }
  }

  const Scenario& scenario() const { return s_; }
  const ChartGrid& grid() const { return grid_; }
  const Field& phi() const { return phi_; }
  const PointMetric& psi() const { return psi_; }
  std::uint64_t seed() const { return seed_; }

  Field sample_covector(const VectorSpec& v) const {
    return Field::sample(grid_, covector_shape(v.size()), [&](std::span<const double> a, std::span<double> out) {
      for (std::size_t k = 0; k < v.components.size(); ++k) out[k] = v.components[k](a);
    });
  }

  static PointVector point_vector(const VectorSpec& v) {
    return [v](const Vec& x) { return v.eval(span_of(x)); };
  }

  MapJet map() const {
    const MapSpec& m = *s_.map;
    return MapJet::sample(grid_, s_.n, [&](std::span<const double> a) { return m.components.eval(a); }, m.seam);
  }

  FirstOrderSystem system() const {
    const SystemSpec& sys = *s_.system;
    if (sys.kind == "orbit") return FirstOrderSystem::orbit(s_.n, point_vector(sys.generators[0].xi));
    if (sys.kind == "pfaff") return FirstOrderSystem::pfaff(sample_covector(sys.generators[0].A));
    if (sys.kind == "pseudolinear")
      return FirstOrderSystem::pseudolinear(s_.n, point_vector(sys.generators[0].xi), sample_covector(sys.generators[0].A));
    std::vector<PointVector> xi;
    std::vector<Field> A;
    for (const auto& g : sys.generators) {
      xi.push_back(point_vector(g.xi));
      A.push_back(sample_covector(g.A));
    }
    return FirstOrderSystem::group(s_.n, xi, A);
  }

  SourceScalar sigma() const {
    const ScalarSpec& sp = s_.sigma;
    switch (sp.kind) {
      case ScalarSpec::Kind::expression: {
        const Expression e = sp.expr;
        const ChartGrid g = grid_;
        return [e, g](std::size_t node, const Vec& b) { return e(g.coords(node), span_of(b)); };
      }
      case ScalarSpec::Kind::pfaff: return pfaff_sigma(system().A.front(), phi_, s_.tol.eps_sing);
      default: return [](std::size_t, const Vec&) { return 0.0; };
    }
  }

  TargetScalar tau() const {
    const ScalarSpec& sp = s_.tau;
    switch (sp.kind) {
      case ScalarSpec::Kind::expression: {
        const Expression e = sp.expr;
        return [e](const Vec& x, const Vec& y) { return e(span_of(x), span_of(y)); };
      }
      case ScalarSpec::Kind::orbit: return orbit_tau(system().xi.front(), psi_, s_.tol.eps_sing);
      default: return [](const Vec&, const Vec&) { return 0.0; };
    }
  }

  ConnectionTensorP connection() const {
    const int m = grid_.dim(), n = std::max(s_.n, 1);
    if (s_.P.kind == "fiber_covector") return ConnectionTensorP::fiber_from_covector(sample_covector(s_.P.field), n);
    if (s_.P.kind == "base_form") return ConnectionTensorP::base_from_form(m, n, point_vector(s_.P.field));
    return ConnectionTensorP::zero(m, n);
  }

  HarmonicMapProblem problem() const {
    return HarmonicMapProblem(phi_, GLMetricPair::conformal(phi_, sigma(), psi_, tau()), connection());
  }

  TangentFunction gl_sigma() const {
    const ScalarSpec& sp = s_.gl_sigma;
    switch (sp.kind) {
      case ScalarSpec::Kind::expression: {
        const Expression e = sp.expr;
        return [e](std::span<const double> x, std::span<const double> y) { return e(x, y); };
      }
      case ScalarSpec::Kind::log_conformal: {
        const Vec A = Eigen::Map<const Vec>(sp.A.data(), static_cast<Eigen::Index>(sp.A.size()));
        return [A](std::span<const double>, std::span<const double> y) {
          const double ay = A.dot(Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(y.size())));
          return std::log(std::abs(ay) / A.norm());
        };
      }
      default: return [](std::span<const double>, std::span<const double>) { return 0.0; };
    }
  }

  ConformalGLSpace gl_space(RicciConvention conv = RicciConvention::last_slot, std::optional<double> fiber_step = {}) const {
    GLSpaceOptions o;
    o.fiber_step = fiber_step.value_or(s_.tol.fiber_step);
    return ConformalGLSpace(curvature_package(phi_, conv), gl_sigma(), o);
  }

  std::vector<TangentSample> samples(const json& p) const {
    const int m = grid_.dim();
    Vec y = Vec::Zero(m);
    if (p.contains("y")) {
      const auto v = p["y"].get<std::vector<double>>();
      y = Eigen::Map<const Vec>(v.data(), m);
    } else if (!s_.direction.empty()) {
      y = Eigen::Map<const Vec>(s_.direction.data(), m);
    } else {
      y(0) = 1.0;
    }
    int stride = 1;
    if (p.contains("stride")) stride = p["stride"].get<int>();
    else stride = std::max(1, static_cast<int>(std::ceil(std::pow(static_cast<double>(grid_.size()) / 512.0, 1.0 / m))));
    std::vector<TangentSample> out;
    for (std::size_t node = 0; node < grid_.size(); ++node) {
      bool keep = true;
      for (int a = 0; a < m; ++a) keep = keep && grid_.axis_index(node, a) % stride == 0;
      if (keep) out.push_back({node, y});
    }
    return out;
  }

private:
  const Scenario& s_;
  ChartGrid grid_;
  std::uint64_t seed_;
  Field phi_;
  PointMetric psi_;
};

class Dumper {
public:
  Dumper(std::optional<std::filesystem::path> dir, std::size_t task_index, std::string task)
      : dir_(std::move(dir)), prefix_(std::to_string(task_index) + "_" + std::move(task)) {}

  void field(TaskRecord& r, const std::string& name, const Field& f) {
    if (!dir_) return;
    const ChartGrid& g = f.grid();
    std::vector<std::string> header;
    for (int a = 0; a < g.dim(); ++a) header.push_back("a" + std::to_string(a));
    for (auto& c : component_names(name, f.shape())) header.push_back(c);
    std::vector<std::vector<double>> rows;
    rows.reserve(g.size());
    for (std::size_t node = 0; node < g.size(); ++node) {
      std::vector<double> row = g.coords(node);
      for (std::size_t c = 0; c < f.components(); ++c) row.push_back(f(node, c));
      rows.push_back(std::move(row));
    }
    write(r, name, header, rows);
  }

  void samples(TaskRecord& r, const std::string& name, const ChartGrid& g, const std::vector<TangentSample>& s,
               const std::vector<std::string>& cols, const std::vector<std::vector<double>>& values) {
    if (!dir_) return;
    std::vector<std::string> header;
    for (int a = 0; a < g.dim(); ++a) header.push_back("x" + std::to_string(a));
    for (int a = 0; a < g.dim(); ++a) header.push_back("y" + std::to_string(a));
    header.insert(header.end(), cols.begin(), cols.end());
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < s.size(); ++k) {
      std::vector<double> row = g.coords(s[k].node);
      for (Eigen::Index a = 0; a < s[k].y.size(); ++a) row.push_back(s[k].y(a));
      row.insert(row.end(), values[k].begin(), values[k].end());
      rows.push_back(std::move(row));
    }
    write(r, name, header, rows);
  }

private:
  void write(TaskRecord& r, const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& rows) {
    const auto file = *dir_ / (prefix_ + "_" + name + ".csv");
    write_csv(file, header, rows);
    r.dumps.push_back(file.filename().string());
  }

  std::optional<std::filesystem::path> dir_;
  std::string prefix_;
};

inline json certificate_json(const TheoremCertificate& c) {
  return json{{"functional_value", c.functional_value}, {"half_volume", c.half_volume}, {"gap", c.gap},
              {"max_defect", c.max_defect},             {"K_min", c.K_min},             {"K_max", c.K_max},
              {"max_K_defect", c.max_K_defect},         {"tol_gap", c.tol_gap},         {"tol_defect", c.tol_defect},
              {"verdict", c.verdict}};
}

/// Evaluates L_T on random C^2-bump perturbations; every one must exceed 1/2 Vol.
inline void perturbations(TaskRecord& r, const Context& ctx, const json& p, const MapJet& f, const FirstOrderSystem& sys) {
  if (!p.contains("perturbations")) return;
  const int count = p["perturbations"]["count"].get<int>();
  const double amp = p["perturbations"]["amplitude"].get<double>();
  std::mt19937_64 rng(ctx.seed());
  const double half = half_volume(ctx.phi());
  double min_gap = std::numeric_limits<double>::infinity();
  int not_above = 0;
  for (int k = 0; k < count; ++k) {
    const MapJet q = random_bump_perturbation(f, amp, rng);
    try {
      const double gap = functional_LT(q, sys, ctx.phi(), ctx.psi(), ctx.scenario().tol.eps_sing) - half;
      min_gap = std::min(min_gap, gap);
      if (!(gap > 0.0)) ++not_above;
    } catch (const DomainError&) {
      // A perturbation that leaves the domain of L_T is not admissible; it is skipped and counted.
      r.scalars["perturbations_outside_domain"] = r.scalars.value("perturbations_outside_domain", 0) + 1;
    }
  }
  r.scalars["perturbations"] = count;
  r.scalars["perturbed_min_gap"] = count > 0 ? min_gap : 0.0;
  if (not_above > 0) r.fail(std::to_string(not_above) + " perturbation(s) did not raise L_T above 1/2 Vol");
}

inline TheoremCertificate certify(TaskRecord& r, const Context& ctx, const MapJet& f, const FirstOrderSystem& sys,
                                  bool expect = true) {
  const Tolerances& t = ctx.scenario().tol;
  const TheoremCertificate c = certify_theorem(f, sys, ctx.phi(), ctx.psi(), t.tol_gap, t.tol_defect, t.eps_sing);
  r.certificate = certificate_json(c);
  if (c.verdict != expect) {
    std::ostringstream os;
    os << std::setprecision(6) << "certificate verdict " << (c.verdict ? "true" : "false") << ", expected "
       << (expect ? "true" : "false") << " (gap " << c.gap << ", max defect " << c.max_defect << ")";
    r.fail(os.str());
  }
  return c;
}

// --- tasks ------------------------------------------------------------------

inline void task_energy(TaskRecord& r, const Context& ctx, const json&, Dumper& d) {
  MapJet f = ctx.map();
  const HarmonicMapProblem p = ctx.problem();
  const Field L = lagrangian_density(f, p);
  r.scalars["energy"] = energy(f, p);
  r.scalars["half_volume"] = half_volume(ctx.phi());
  d.field(r, "lagrangian", L);
}

inline void task_el_residual(TaskRecord& r, const Context& ctx, const json& p, Dumper& d) {
  const MapJet f = ctx.map();
  const std::string form = p.value("form", "general");
  const int margin = p.value("margin", 0);
  const double step = ctx.scenario().tol.fd_step;
  Field res;
  if (form == "case_star") {
    const SourceScalar s = ctx.sigma();
    CaseStarData data{[s, m = ctx.grid().dim()](std::size_t node) { return s(node, Vec::Zero(m)); }, ctx.tau(),
                      ctx.sample_covector(ctx.scenario().P.field), ctx.psi()};
    res = el_residual_case_star(f, ctx.phi(), data, step);
  } else if (form == "case_double_star") {
    const TargetScalar t = ctx.tau();
    const int n = ctx.scenario().n;
    CaseDStarData data{ctx.sigma(), [t, n](const Vec& x) { return t(x, Vec::Zero(n)); },
                       Context::point_vector(ctx.scenario().P.field), ctx.psi()};
    res = el_residual_case_dstar(f, ctx.phi(), data, step);
  } else {
    res = el_residual(f, ctx.problem(), step);
  }
  r.max_residuals["residual"] = field_max(res, margin);
  r.scalars["form"] = form;
  d.field(r, "residual", res);
}

inline void task_certify(TaskRecord& r, const Context& ctx, const json& p, Dumper& d) {
  const MapJet f = ctx.map();
  const FirstOrderSystem sys = ctx.system();
  certify(r, ctx, f, sys, p.value("expect", true));
  perturbations(r, ctx, p, f, sys);
  const LTDensity den = lt_density(f, sys, ctx.phi(), ctx.psi(), ctx.scenario().tol.eps_sing);
  d.field(r, "K", den.K);
  d.field(r, "integrand", den.integrand);
}

inline void task_orbit(TaskRecord& r, const Context& ctx, const json& p, Dumper& d) {
  const FirstOrderSystem sys = ctx.system();
  const PointVector xi = sys.xi.front();
  const auto x0v = p["x0"].get<std::vector<double>>();
  const Vec x0 = Eigen::Map<const Vec>(x0v.data(), static_cast<Eigen::Index>(x0v.size()));
  const double step = p.value("step", 1e-3);
  const double eps = ctx.scenario().tol.eps_sing;
  const ChartGrid& g = ctx.grid();
  const MapJet c = integrate_orbit(xi, x0, g, step);
  const Field res = orbit_geodesic_residual(c, xi, ctx.psi(), eps);
  r.max_residuals["residual"] = field_max(res);
  r.scalars["step"] = step;
  r.scalars["spacing"] = g.spacing(0);

  // Halve the step and the spacing.
  const ChartGrid fine({g.extent(0)}, {2 * g.nodes(0) - 1}, {false}, g.stencil_order());
  const double fine_res = orbit_geodesic_residual(integrate_orbit(xi, x0, fine, step / 2), xi, ctx.psi(), eps).max_abs();
  r.scalars["halved_residual_max"] = fine_res;
  r.scalars["halving_ratio"] = res.max_abs() / fine_res;

  if (p.contains("ladder")) {
    json ladder = json::array();
    double prev = 0.0, min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& nj : p["ladder"]) {
      const ChartGrid lg({g.extent(0)}, {nj.get<int>()}, {false}, g.stencil_order());
      const double v = orbit_geodesic_residual(integrate_orbit(xi, x0, lg, lg.spacing(0)), xi, ctx.psi(), eps).max_abs();
      ladder.push_back({{"nodes", nj}, {"residual_max", v}});
      if (prev > 0.0) min_ratio = std::min(min_ratio, prev / v);
      prev = v;
    }
    r.scalars["ladder"] = ladder;
    if (std::isfinite(min_ratio)) r.scalars["ladder_min_ratio"] = min_ratio;
  }

  certify(r, ctx, c, sys);
  perturbations(r, ctx, p, c, sys);
  d.field(r, "curve", c.values());
  d.field(r, "residual", res);
}

inline void task_pfaff(TaskRecord& r, const Context& ctx, const json& p, Dumper& d) {
  const MapJet f = ctx.map();
  const FirstOrderSystem sys = ctx.system();
  const Field& A = sys.A.front();
  const int margin = p.value("margin", ctx.grid().stencil_order());
  const double eps = ctx.scenario().tol.eps_sing;
  certify(r, ctx, f, sys);
  perturbations(r, ctx, p, f, sys);
  const Field res = el_residual_case_dstar(f, ctx.phi(), pfaff_case_data(A, ctx.phi(), eps), ctx.scenario().tol.fd_step);
  const Field display = el_residual_from(pfaff_display_partials(f, A, ctx.phi()), volume_density(ctx.phi()));
  const Field literal = el_residual_from(pfaff_display_partials(f, A, ctx.phi(), true), volume_density(ctx.phi()));
  r.max_residuals["residual"] = field_max(res, margin);
  r.scalars["display_residual_max"] = field_max(display, margin)["value"];
  r.scalars["unit_prefactor_residual_max"] = field_max(literal, margin)["value"];
  d.field(r, "residual", res);
}

inline void task_pseudolinear(TaskRecord& r, const Context& ctx, const json& p, Dumper& d) {
  const MapJet f = ctx.map();
  const FirstOrderSystem sys = ctx.system();
  const double eps = ctx.scenario().tol.eps_sing;
  const PseudolinearScenario ps = pseudolinear_scenario(ctx.scenario().n, sys.xi.front(), sys.A.front(), ctx.phi(), ctx.psi(), eps);
  certify(r, ctx, f, sys);
  perturbations(r, ctx, p, f, sys);
  const double E = energy(f, ps.problem());
  const double LT = functional_LT(f, sys, ctx.phi(), ctx.psi(), eps);
  r.scalars["energy"] = E;
  r.scalars["functional_LT"] = LT;
  r.scalars["energy_minus_LT"] = std::abs(E - LT);
  if (std::abs(E - LT) > 1e-10 * std::abs(LT)) r.fail("the (P; g, h)-energy differs from L_T");
  if (ctx.scenario().n == 1 && ctx.grid().dim() >= 2) {
    const double turning = level_set_turning(f.values(), p.value("margin", 2));
    const double tol = p.value("tol_turning", 1e-8);
    r.scalars["level_set_turning"] = turning;
    if (!(turning <= tol)) {
      std::ostringstream os;
      os << std::setprecision(6) << "level sets are not totally geodesic: turning " << turning << " > " << tol;
      r.fail(os.str());
    }
  }
  d.field(r, "lagrangian", lagrangian_density(f, ps.problem()));
}

inline void task_group(TaskRecord& r, const Context& ctx, const json&, Dumper& d) {
  const MapJet f = ctx.map();
  const FirstOrderSystem sys = ctx.system();
  const double eps = ctx.scenario().tol.eps_sing;
  const Field L = group_system_lagrangian(sys.xi, sys.A, f, ctx.phi(), ctx.psi(), eps);
  const Field sq = volume_density(ctx.phi());
  const auto w = quadrature_weights(ctx.grid());
  double integral = 0.0;
  for (std::size_t node = 0; node < w.size(); ++node) integral += w[node] * sq(node, 0) * L(node, 0);
  const double LT = functional_LT(f, sys, ctx.phi(), ctx.psi(), eps);
  const double half = half_volume(ctx.phi());
  r.scalars["integral"] = integral;
  r.scalars["functional_LT"] = LT;
  r.scalars["half_volume"] = half;
  r.scalars["integral_minus_LT"] = std::abs(integral - LT);
  if (std::abs(integral - LT) > 1e-10 * std::abs(LT)) r.fail("the group density does not integrate to L_T");
  if (LT < half - 1e-9) r.fail("L_T is below 1/2 Vol");
  d.field(r, "lagrangian", L);
}

inline json sample_location(const ChartGrid& g, const TangentSample& s) {
  json j = location(g, s.node);
  j["y"] = std::vector<double>(s.y.data(), s.y.data() + s.y.size());
  return j;
}

struct SampleMax {
  double value = -1.0;
  json at;
  void update(double v, const ChartGrid& g, const TangentSample& s) {
    if (v > value || std::isnan(v)) {
      value = v;
      at = sample_location(g, s);
    }
  }
  json to_json() const {
    json j = at.is_null() ? json::object() : at;
    j["value"] = value < 0.0 ? 0.0 : value;
    return j;
  }
};

inline void task_maxwell(TaskRecord& r, const Context& ctx, const json& p, Dumper& d) {
  const ConformalGLSpace space = ctx.gl_space();
  const auto samples = ctx.samples(p);
  SampleMax F, f, first, second, third;
  std::vector<std::vector<double>> rows;
  for (const auto& s : samples) {
    const auto em = em_tensors(space, s.node, s.y);
    const auto mx = maxwell_residuals(space, s.node, s.y);
    F.update(em.F.cwiseAbs().maxCoeff(), space.grid(), s);
    f.update(em.f.cwiseAbs().maxCoeff(), space.grid(), s);
    first.update(mx.first.max_abs(), space.grid(), s);
    second.update(mx.second.max_abs(), space.grid(), s);
    third.update(mx.third.max_abs(), space.grid(), s);
    rows.push_back({em.F.cwiseAbs().maxCoeff(), em.f.cwiseAbs().maxCoeff(), mx.first.max_abs(), mx.second.max_abs(),
                    mx.third.max_abs()});
  }
  r.scalars["samples"] = samples.size();
  r.max_residuals["F"] = F.to_json();
  r.max_residuals["f"] = f.to_json();
  r.max_residuals["first"] = first.to_json();
  r.max_residuals["second"] = second.to_json();
  r.max_residuals["third"] = third.to_json();
  if (p.contains("fiber_steps")) {
    json study = json::array();
    for (double step : p["fiber_steps"].get<std::vector<double>>()) {
      const ConformalGLSpace sp = ctx.gl_space(RicciConvention::last_slot, step);
      double worst = 0.0;
      for (const auto& s : samples) worst = std::max(worst, maxwell_residuals(sp, s.node, s.y).third.max_abs());
      study.push_back({{"fiber_step", step}, {"third_max", worst}});
    }
    r.scalars["fiber_step_study"] = study;
  }
  d.samples(r, "maxwell", space.grid(), samples, {"F_max", "f_max", "first_max", "second_max", "third_max"}, rows);
}

inline void task_einstein(TaskRecord& r, const Context& ctx, const json& p, Dumper& d) {
  const ConformalGLSpace space = ctx.gl_space();
  const auto samples = ctx.samples(p);
  const double K = p.value("K", 1.0);
  const bool em = p.value("energy_momentum", true);
  const bool compare = p.value("compare_riemann", false);
  const Field G = space.base().einstein_tensor();
  SampleMax h, v, t, anti, match;
  std::vector<std::vector<double>> rows;
  for (const auto& s : samples) {
    const EinsteinSystem e = einstein_system(space, s.node, s.y, K, em);
    h.update(e.h_lhs.cwiseAbs().maxCoeff(), space.grid(), s);
    v.update(e.v_lhs.cwiseAbs().maxCoeff(), space.grid(), s);
    t.update(e.t_ij.cwiseAbs().maxCoeff(), space.grid(), s);
    anti.update(e.t_antisymmetry(), space.grid(), s);
    std::vector<double> row;
    for (int i = 0; i < e.h_lhs.rows(); ++i)
      for (int j = 0; j < e.h_lhs.cols(); ++j) row.push_back(e.h_lhs(i, j));
    for (int i = 0; i < e.v_lhs.rows(); ++i)
      for (int j = 0; j < e.v_lhs.cols(); ++j) row.push_back(e.v_lhs(i, j));
    if (compare) match.update((e.h_lhs - G.matrix(s.node)).cwiseAbs().maxCoeff(), space.grid(), s);
    rows.push_back(std::move(row));
  }
  r.scalars["samples"] = samples.size();
  r.scalars["K"] = K;
  r.max_residuals["h_lhs"] = h.to_json();
  r.max_residuals["v_lhs"] = v.to_json();
  r.max_residuals["t"] = t.to_json();
  r.max_residuals["t_antisymmetry"] = anti.to_json();
  if (compare) r.max_residuals["riemann_mismatch"] = match.to_json();
  if (space.dim() == 2 && v.value != 0.0) r.fail("v-equation left side is not identically zero in two dimensions");
  const int n = space.dim();
  std::vector<std::string> cols;
  for (const char* name : {"h_lhs", "v_lhs"})
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cols.push_back(std::string(name) + "_" + std::to_string(i) + "_" + std::to_string(j));
  d.samples(r, "einstein", space.grid(), samples, cols, rows);
}

inline void task_curvature(TaskRecord& r, const Context& ctx, const json& p, Dumper& d) {
  const RicciConvention conv = p.value("convention", std::string("last_slot")) == "third_slot" ? RicciConvention::third_slot
                                                                                               : RicciConvention::last_slot;
  const RiemannPackage pkg = curvature_package(ctx.phi(), conv);
  r.max_residuals["christoffel"] = field_max(pkg.christoffel);
  r.max_residuals["curvature"] = field_max(pkg.curvature);
  r.max_residuals["ricci"] = field_max(pkg.ricci);
  r.max_residuals["scalar"] = field_max(pkg.scalar);
  const auto& v = pkg.scalar.values();
  r.scalars["scalar_min"] = *std::min_element(v.begin(), v.end());
  r.scalars["scalar_max"] = *std::max_element(v.begin(), v.end());
  r.scalars["first_bianchi_defect"] = first_bianchi_defect(pkg);
  if (p.contains("expected_scalar")) {
    const double expect = p["expected_scalar"].get<double>();
    Field dev = pkg.scalar;
    for (std::size_t node = 0; node < dev.nodes(); ++node) dev(node, 0) -= expect;
    r.max_residuals["scalar_deviation"] = field_max(dev);
  }
  d.field(r, "scalar", pkg.scalar);
}

inline void apply_checks(TaskRecord& r, const TaskSpec& t) {
  for (const Check& c : t.checks) {
    json loc;
    double value;
    if (r.max_residuals.contains(c.quantity)) {
      value = r.max_residuals[c.quantity]["value"].get<double>();
      loc = r.max_residuals[c.quantity];
    } else if (r.scalars.contains(c.quantity) && r.scalars[c.quantity].is_number()) {
      value = r.scalars[c.quantity].get<double>();
    } else if (r.certificate.is_object() && r.certificate.contains(c.quantity) && r.certificate[c.quantity].is_number()) {
      value = r.certificate[c.quantity].get<double>();
    } else {
      r.fail("check on unknown quantity '" + c.quantity + "'");
      continue;
    }
    std::ostringstream os;
    os << std::setprecision(6);
    if (c.max && !(value <= *c.max)) {
      os << c.quantity << " = " << value << " exceeds max " << *c.max << describe(loc);
      r.fail(os.str());
    } else if (c.min && !(value >= *c.min)) {
      os << c.quantity << " = " << value << " is below min " << *c.min << describe(loc);
      r.fail(os.str());
    }
  }
}

} // namespace detail

/// Runs every task in order. Numerical errors become task-level errors.
inline Report run_scenario(const Scenario& s, const RunOptions& opt = {}) {
  set_thread_count(opt.threads);
  std::optional<std::filesystem::path> dir;
  if (opt.out_dir) {
    dir = std::filesystem::path(*opt.out_dir);
    std::filesystem::create_directories(*dir);
  }
  detail::Context ctx(s, opt);
  Report rep;
  rep.scenario = s.name;
  rep.environment = json{{"grid_nodes", ctx.grid().nodes_per_axis()},
                         {"stencil_order", ctx.grid().stencil_order()},
                         {"seed", ctx.seed()},
                         {"threads", opt.threads}};
  for (std::size_t k = 0; k < s.tasks.size(); ++k) {
    const TaskSpec& t = s.tasks[k];
    TaskRecord r;
    r.task = t.task;
    r.path = t.path;
    detail::Dumper d(dir, k, t.task);
    const auto start = std::chrono::steady_clock::now();
    try {
      if (t.task == "energy") detail::task_energy(r, ctx, t.params, d);
      else if (t.task == "el_residual") detail::task_el_residual(r, ctx, t.params, d);
      else if (t.task == "certify_theorem") detail::task_certify(r, ctx, t.params, d);
      else if (t.task == "orbit") detail::task_orbit(r, ctx, t.params, d);
      else if (t.task == "pfaff") detail::task_pfaff(r, ctx, t.params, d);
      else if (t.task == "pseudolinear") detail::task_pseudolinear(r, ctx, t.params, d);
      else if (t.task == "group_lagrangian") detail::task_group(r, ctx, t.params, d);
      else if (t.task == "maxwell") detail::task_maxwell(r, ctx, t.params, d);
      else if (t.task == "einstein") detail::task_einstein(r, ctx, t.params, d);
      else if (t.task == "curvature") detail::task_curvature(r, ctx, t.params, d);
      detail::apply_checks(r, t);
    } catch (const DomainError& e) {
      r.status = "error";
      std::string msg = e.what();
      if (!e.nodes().empty()) msg += detail::describe(detail::location(ctx.grid(), e.nodes().front()));
      r.failures.push_back(msg);
    } catch (const SingularMetricError& e) {
      r.status = "error";
      r.failures.push_back(e.what());
    } catch (const std::exception& e) {
      r.status = "error";
      r.failures.push_back(e.what());
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.tasks.push_back(std::move(r));
  }
  if (dir) {
    std::ofstream out(*dir / "report.json");
    out << std::setw(2) << rep.to_json() << '\n';
  }
  return rep;
}

} // namespace glh::cli

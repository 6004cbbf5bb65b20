#pragma once

// Bundled scenarios. Each one is an ordinary scenario document, so
// `run <name>` goes through the same parser and validator as a file.

#include <string>
#include <vector>

#include "scenario.hpp"

namespace glh::cli {

struct Builtin {
  std::string name;
  std::string construction;
  std::string summary;
  const char* document;
};

inline const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> list{
      {"orbit-rotation", "orbits of a vector field",
       "RK4 orbit of the rotation field is a harmonic curve and minimizes L_T",
       R"json({
  "name": "orbit-rotation",
  "description": "Orbit of xi = (-x1, x0) from (1, 0) over a quarter turn.",
  "seed": 1,
  "m_space": {"extents": [[0, 1.5707963267948966]], "nodes": [1572], "stencil": 4, "phi": "identity"},
  "n_space": {"dim": 2, "psi": "identity"},
  "system": {"kind": "orbit", "xi": ["-x1", "x0"]},
  "tolerances": {"tol_gap": 1e-6, "tol_defect": 1e-6},
  "tasks": [
    {"task": "orbit", "x0": [1, 0], "step": 1e-3, "ladder": [26, 51, 101, 201],
     "perturbations": {"count": 100, "amplitude": 0.1},
     "checks": {"residual": {"max": 1e-4}, "gap": {"max": 1e-6}, "ladder_min_ratio": {"min": 8}}}
  ]
})json"},
      {"pfaff-exact", "Pfaff systems df = A",
       "exact primitive of a closed form attains 1/2 Vol; the conformal prefactor is checked",
       R"json({
  "name": "pfaff-exact",
  "description": "u = 1 + a0 + a1/2 + sin(2 a0 + a1)/5 with A = du on the unit square.",
  "seed": 2,
  "m_space": {"extents": [[0, 1], [0, 1]], "nodes": [33, 33], "stencil": 4,
              "phi": [["1 + 0.2*a0", "0.05"], ["0.05", "1 + 0.1*a1"]]},
  "n_space": {"dim": 1, "psi": "identity"},
  "map": {"components": ["1 + a0 + 0.5*a1 + 0.2*sin(2*a0 + a1)"]},
  "system": {"kind": "pfaff", "A": ["1 + 0.4*cos(2*a0 + a1)", "0.5 + 0.2*cos(2*a0 + a1)"]},
  "tolerances": {"tol_gap": 1e-6, "tol_defect": 1e-3},
  "tasks": [
    {"task": "pfaff", "perturbations": {"count": 100, "amplitude": 0.1},
     "checks": {"gap": {"max": 1e-6}}}
  ]
})json"},
      {"pseudolinear-exp", "pseudolinear functions",
       "f = exp(<v, a> + w) solves df = f v and has totally geodesic level sets",
       R"json({
  "name": "pseudolinear-exp",
  "description": "f(a) = exp(a0 + a1) on the unit square, xi = 1, A = f v with v = (1, 1).",
  "seed": 3,
  "m_space": {"extents": [[0, 1], [0, 1]], "nodes": [65, 65], "phi": "identity"},
  "n_space": {"dim": 1, "psi": "identity"},
  "map": {"components": ["exp(a0 + a1)"]},
  "system": {"kind": "pseudolinear", "xi": ["1"], "A": ["exp(a0 + a1)", "exp(a0 + a1)"]},
  "tolerances": {"tol_gap": 1e-6, "tol_defect": 5e-3},
  "tasks": [
    {"task": "pseudolinear", "tol_turning": 1e-8, "perturbations": {"count": 100, "amplitude": 0.1},
     "checks": {"gap": {"max": 1e-6}}}
  ]
})json"},
      {"group-two-generators", "systems built from a Lie group action",
       "two-generator system on the torus: density, integral and lower bound of L_T",
       R"json({
  "name": "group-two-generators",
  "description": "T = xi_1 A^1 + xi_2 A^2 along a lifted torus map with non-flat phi and psi.",
  "seed": 4,
  "m_space": {"extents": [[0, 6.283185307179586], [0, 6.283185307179586]], "nodes": [12, 12],
              "periodic": [true, true],
              "phi": [["1 + 0.2*sin(a0)", "0.1"], ["0.1", "1.1"]]},
  "n_space": {"dim": 2, "psi": [["1.2 + 0.3*sin(x0)", "0.1*cos(x0 + x1)"], ["0.1*cos(x0 + x1)", "1 + 0.2*cos(x1)"]]},
  "map": {"components": ["a0 + 0.2*sin(a1)", "a1 + 0.1*cos(a0)"],
          "seam": [6.283185307179586, 0, 0, 6.283185307179586]},
  "system": {"kind": "group", "generators": [
    {"xi": ["1", "0"], "A": ["1", "0.2*sin(a1)"]},
    {"xi": ["0.1*sin(x0)", "1"], "A": ["0.1*cos(a0)", "1"]}
  ]},
  "tasks": [
    "group_lagrangian",
    {"task": "certify_theorem", "expect": false, "perturbations": {"count": 20, "amplitude": 0.1}}
  ]
})json"},
      {"sphere-curvature", "base curvature of the conformal space",
       "round sphere of radius 2 has scalar curvature 1/2",
       R"json({
  "name": "sphere-curvature",
  "description": "Round sphere of radius 2 on the chart [0.3, pi - 0.3] x [0, 2 pi).",
  "m_space": {"extents": [[0.3, 2.8415926535897931], [0, 6.283185307179586]], "nodes": [128, 128],
              "periodic": [false, true], "stencil": 4, "gamma": {"builtin": "round-sphere", "radius": 2}},
  "tasks": [
    {"task": "curvature", "expected_scalar": 0.5, "checks": {"scalar_deviation": {"max": 1e-3}}}
  ]
})json"},
      {"maxwell-logconformal", "electromagnetic tensors and Maxwell equations",
       "sigma = ln(|A(y)| / |A|) over a curved metric: the cyclic fiber identity holds",
       R"json({
  "name": "maxwell-logconformal",
  "description": "Log-conformal factor over a non-flat metric on the unit cube.",
  "m_space": {"extents": [[0, 1], [0, 1], [0, 1]], "nodes": [9, 9, 9],
              "gamma": [["1.3 + 0.1*sin(a0 + a2)", "0.05*a1", "0"],
                        ["0.05*a1", "1.1 + 0.1*cos(a1)", "0.05*a0*a2"],
                        ["0", "0.05*a0*a2", "1.2"]]},
  "gl_sigma": {"builtin": "log-conformal", "A": [0.5, -0.8, 0.3]},
  "direction": [1, -0.4, 0.6],
  "tasks": [
    {"task": "maxwell", "stride": 2, "fiber_steps": [1e-2, 5e-3, 2.5e-3],
     "checks": {"third": {"max": 1e-6}}}
  ]
})json"},
      {"einstein-2d", "Einstein equations of the conformal space",
       "two-dimensional sphere: the v-equation left side vanishes identically",
       R"json({
  "name": "einstein-2d",
  "description": "Unit sphere with a direction-dependent conformal factor.",
  "m_space": {"extents": [[0.5, 2.6415926535897931], [0, 6.283185307179586]], "nodes": [33, 33],
              "periodic": [false, true], "stencil": 4, "gamma": {"builtin": "round-sphere", "radius": 1}},
  "gl_sigma": "0.2*cos(x0) + 0.1*ln(1 + dot(y, y))",
  "direction": [0.5, -0.2],
  "tasks": [
    {"task": "einstein", "K": 1, "stride": 4, "checks": {"v_lhs": {"max": 0}}},
    {"task": "curvature", "expected_scalar": 2, "checks": {"scalar_deviation": {"max": 1e-2}}}
  ]
})json"},
      {"flat-vacuum", "Einstein and Maxwell equations, vacuum limit",
       "flat metric and sigma = 0: every field-equation output vanishes",
       R"json({
  "name": "flat-vacuum",
  "description": "gamma = identity, sigma = 0 on the unit cube.",
  "m_space": {"extents": [[0, 1], [0, 1], [0, 1]], "nodes": [7, 7, 7], "gamma": "identity"},
  "gl_sigma": {"builtin": "zero"},
  "tasks": [
    {"task": "curvature", "checks": {"christoffel": {"max": 1e-12}, "curvature": {"max": 1e-12},
                                     "ricci": {"max": 1e-12}, "scalar": {"max": 1e-12}}},
    {"task": "maxwell", "stride": 1, "checks": {"F": {"max": 1e-12}, "f": {"max": 1e-12}, "first": {"max": 1e-12},
                                                "second": {"max": 1e-12}, "third": {"max": 1e-12}}},
    {"task": "einstein", "K": 1, "stride": 1, "compare_riemann": true,
     "checks": {"h_lhs": {"max": 1e-12}, "v_lhs": {"max": 1e-12}, "t": {"max": 1e-12}}}
  ]
})json"},
      {"harmonic-torus", "energy and Euler-Lagrange equations",
       "energy and residuals of a torus map for a fully direction-dependent pair",
       R"json({
  "name": "harmonic-torus",
  "description": "Energy, general residual and the first special case on a 14 x 14 torus.",
  "m_space": {"extents": [[0, 6.283185307179586], [0, 6.283185307179586]], "nodes": [14, 14],
              "periodic": [true, true],
              "phi": [["1 + 0.2*sin(a0)", "0.1*sin(a0 + a1)"], ["0.1*sin(a0 + a1)", "1.1 + 0.15*cos(a1)"]]},
  "n_space": {"dim": 2, "psi": [["1.2 + 0.3*sin(x0)", "0.1*cos(x0 + x1)"], ["0.1*cos(x0 + x1)", "1 + 0.2*cos(x1)"]]},
  "map": {"components": ["a0 + 0.3*sin(a1) + 0.1*cos(a0)", "a1 + 0.2*sin(a0 + a1)"],
          "seam": [6.283185307179586, 0, 0, 6.283185307179586]},
  "sigma": "0.1*sin(a0)",
  "tau": "0.1*cos(x1) + 0.05*ln(1 + dot(y, y))",
  "connection_P": {"kind": "fiber_covector", "A": ["1 + 0.2*sin(a1)", "0.5 + 0.1*cos(a0)"]},
  "tasks": [
    "energy",
    {"task": "el_residual", "form": "general"},
    {"task": "el_residual", "form": "case_star"}
  ]
})json"},
  };
  return list;
}

inline const Builtin* find_builtin(const std::string& name) {
  for (const auto& b : builtins())
    if (b.name == name) return &b;
  return nullptr;
}

inline json builtin_document(const Builtin& b) { return json::parse(b.document); }

} // namespace glh::cli

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "gl_space.hpp"

namespace glh {

/// Electromagnetic tensors of the conformal space at one sample:
///   F_ij = (g_ip sigma_j - g_jp sigma_i) y^p,  f_ij = (g_ip sigma-dot_j - g_jp sigma-dot_i) y^p.
struct ElectromagneticTensors {
  Mat F;
  Mat f;
};

inline Mat em_horizontal(const ConformalGLSpace& space, std::size_t node, const Vec& y) {
  const Vec gy = space.metric(node, y) * y;
  const Vec s = sigma_horizontal(space, node, y);
  return gy * s.transpose() - s * gy.transpose();
}

inline Mat em_vertical(const ConformalGLSpace& space, std::size_t node, const Vec& y) {
  const Vec gy = space.metric(node, y) * y;
  const Vec s = sigma_vertical(space, node, y);
  return gy * s.transpose() - s * gy.transpose();
}

inline ElectromagneticTensors em_tensors(const ConformalGLSpace& space, std::size_t node, const Vec& y) {
  return {em_horizontal(space, node, y), em_vertical(space, node, y)};
}

inline std::vector<ElectromagneticTensors> em_tensors(const ConformalGLSpace& space,
                                                      const std::vector<TangentSample>& samples) {
  std::vector<ElectromagneticTensors> out(samples.size());
  parallel_for(samples.size(), [&](std::size_t s) { out[s] = em_tensors(space, samples[s].node, samples[s].y); });
  return out;
}

/// Residuals of the three cyclic Maxwell identities at one sample.
///   first:  sum F_{ij|k} - sum g_ip r^h_qjk sigma-dot_h y^p y^q
///   second: sum F_ij|_k + sum f_{ij|k}
///   third:  sum f_ij|_k
/// Sums run over cyclic permutations of (i, j, k).
struct MaxwellResiduals {
  Tensor3 first;
  Tensor3 second;
  Tensor3 third;
};

inline MaxwellResiduals maxwell_residuals(const ConformalGLSpace& space, std::size_t node, const Vec& y) {
  const int n = space.dim();
  const RiemannPackage& base = space.base();
  const auto dF = hv_covariant_2(space, [&](std::size_t nd, const Vec& yy) { return em_horizontal(space, nd, yy); },
                                 node, y);
  const auto df = hv_covariant_2(space, [&](std::size_t nd, const Vec& yy) { return em_vertical(space, nd, yy); },
                                 node, y);
  const Vec gy = space.metric(node, y) * y;
  const Vec sdot = sigma_vertical(space, node, y);

  Tensor3 curvature_term(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int h = 0; h < n; ++h)
          for (int q = 0; q < n; ++q) acc += base.R(node, h, q, j, k) * sdot(h) * y(q);
        curvature_term(i, j, k) = gy(i) * acc;
      }

  MaxwellResiduals r{cyclic_sum(dF.h), cyclic_sum(dF.v), cyclic_sum(df.v)};
  const Tensor3 cyc_curv = cyclic_sum(curvature_term);
  const Tensor3 cyc_fh = cyclic_sum(df.h);
  for (std::size_t c = 0; c < r.first.v.size(); ++c) {
    r.first.v[c] -= cyc_curv.v[c];
    r.second.v[c] += cyc_fh.v[c];
  }
  return r;
}

inline std::vector<MaxwellResiduals> maxwell_residuals(const ConformalGLSpace& space,
                                                       const std::vector<TangentSample>& samples) {
  std::vector<MaxwellResiduals> out(samples.size());
  parallel_for(samples.size(), [&](std::size_t s) { out[s] = maxwell_residuals(space, samples[s].node, samples[s].y); });
  return out;
}

/// The four terms of t_ij, kept separate for inspection.
struct DeflectionTerms {
  Mat conformal;  // (n-2)(gamma_ij sigma_bar - sigma_ij)
  Mat trace;      // gamma_ij r_st y^s gamma^tp sigma-dot_p
  Mat mixed;      // sigma-dot_i r^a_tja y^t
  Mat transfer;   // -gamma_is gamma^ap sigma-dot_p r^s_tja y^t

  Mat total() const { return conformal + trace + mixed + transfer; }
};

inline DeflectionTerms deflection_terms(const ConformalGLSpace& space, std::size_t node, const Vec& y,
                                        const SigmaBlocks& b) {
  const int n = space.dim();
  const RiemannPackage& base = space.base();
  const Mat g = space.gamma(node);
  const Mat gi = space.gamma_inv(node);
  const Mat ric = base.ricci.matrix(node);
  DeflectionTerms t;
  t.conformal = (n - 2) * (g * b.sigma_bar - b.sigma_ij);
  const Vec sdot_up = gi * b.sigma_dot_i;
  t.trace = g * (y.dot(ric * sdot_up));

  // c_j = r^a_tja y^t (trace over the first and last slots), and
  // w^s_j = r^s_tja y^t sigma-dot^a.
  Vec c = Vec::Zero(n);
  Mat w = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int t_ = 0; t_ < n; ++t_)
      for (int a = 0; a < n; ++a) {
        c(j) += base.R(node, a, t_, j, a) * y(t_);
        for (int s = 0; s < n; ++s) w(s, j) += base.R(node, s, t_, j, a) * y(t_) * sdot_up(a);
      }
  t.mixed = b.sigma_dot_i * c.transpose();
  t.transfer = -g * w;
  return t;
}

inline Mat deflection_t(const ConformalGLSpace& space, std::size_t node, const Vec& y) {
  return deflection_terms(space, node, y, sigma_blocks(space, node, y)).total();
}

/// Left-hand sides of the h- and v-Einstein equations at one sample and the
/// energy-momentum components they imply for a gravitational constant K.
struct EinsteinSystem {
  Mat h_lhs;  // r_ij - r gamma_ij / 2 + t_ij
  Mat v_lhs;  // (2 - n)(sigma-dot_ab - sigma-dot gamma_ab)
  Mat t_ij;
  DeflectionTerms t_terms;
  double K = 0.0;
  bool has_energy_momentum = false;
  Mat TH;  // h_lhs / K
  Mat TV;  // v_lhs / K

  /// Largest |t_ij - t_ji| / 2.
  double t_antisymmetry() const { return 0.5 * (t_ij - t_ij.transpose()).cwiseAbs().maxCoeff(); }
};

inline EinsteinSystem einstein_system(const ConformalGLSpace& space, std::size_t node, const Vec& y, double K,
                                      bool energy_momentum = true) {
  if (energy_momentum && K == 0.0)
    throw DivisionGuardError("einstein_system: gravitational constant is zero but energy-momentum was requested");
  const int n = space.dim();
  const Mat g = space.gamma(node);
  const SigmaBlocks b = sigma_blocks(space, node, y);
  EinsteinSystem e;
  e.K = K;
  e.t_terms = deflection_terms(space, node, y, b);
  e.t_ij = e.t_terms.total();
  e.h_lhs = space.base().ricci.matrix(node) - 0.5 * space.base().scalar(node, 0) * g + e.t_ij;
  if (n == 2)
    e.v_lhs = Mat::Zero(n, n);
  else
    e.v_lhs = (2.0 - n) * (b.sigma_dot_ab - b.sigma_dot * g);
  e.has_energy_momentum = energy_momentum;
  if (energy_momentum) {
    e.TH = e.h_lhs / K;
    e.TV = e.v_lhs / K;
  }
  return e;
}

inline std::vector<EinsteinSystem> einstein_system(const ConformalGLSpace& space,
                                                   const std::vector<TangentSample>& samples, double K,
                                                   bool energy_momentum = true) {
  std::vector<EinsteinSystem> out(samples.size());
  parallel_for(samples.size(),
               [&](std::size_t s) { out[s] = einstein_system(space, samples[s].node, samples[s].y, K, energy_momentum); });
  return out;
}

} // namespace glh

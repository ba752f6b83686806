#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "qqsphere/calculus.hpp"

// Landscape analysis for real problems: the three-region strict-saddle covers
// of the sphere (large-β via moduli balance, small-β via eigenbasis
// coordinates), explicit negative-curvature directions, the flat-saddle
// counterexample family, and empirical Kurdyka-Łojasiewicz exponents.

namespace qqs {

struct Thresholds {
  double gamma = 0.0;
  double beta_large = 0.0;              // strict-saddle regime: β at least this
  std::optional<double> beta_small;     // strict-saddle regime: β at most this (needs δ > 0)
  double beta_count_lower = 0.0;        // β above: at least 2^n minima
  double beta_count_exact = 0.0;        // β above: exactly 2^n minima
};

inline Thresholds thresholds(const Problem& p, double gamma) {
  Spectrum s = spectrum(p);
  Thresholds t;
  t.gamma = gamma;
  double n = p.n;
  t.beta_large = 8.0 * n / (n - 1.0) * (1.0 + gamma) * s.rho * std::pow(n, 1.5);
  if (p.n < 2) t.beta_large = 0.0;
  t.beta_count_lower = s.rho * n * n;
  t.beta_count_exact = p.n >= 2 ? 18.0 * n * n * n / (n - 1.0) * s.rho : 0.0;
  if (s.delta > 0.0)
    t.beta_small =
        s.delta / (2.0 * (7.0 / 3.0 + gamma) + (2.0 / 3.0 + gamma) * s.rho / s.delta);
  return t;
}

inline double require_beta_small(const Thresholds& t) {
  if (!t.beta_small)
    throw Error(ErrorKind::Precondition, "NoSpectralGap",
                "small-beta threshold needs delta > 0");
  return *t.beta_small;
}

enum class Regime { LargeBeta, SmallBeta };

struct RegionLabel {
  Regime regime = Regime::LargeBeta;
  bool r1 = false, r2 = false, r3 = false;
  // membership statistics
  double balance_inf = 0.0;   // ‖|z|² − 𝟙/n‖_∞        (large β)
  double min_zk2 = 0.0;       // min_k z_k²             (large β)
  double grad_var = 0.0;      // ‖Az‖² − (zᵀAz)²        (small β)
  double alpha_min_sq = 0.0;  // α_n² in the eigenbasis (small β)
};

namespace detail {

inline RealVec real_sphere_point(const Problem& p, const Vec& z_in) {
  if (p.field != Field::Real)
    throw Error(ErrorKind::Validation, "ComplexNotSupported",
                "region classification is defined for real problems");
  return checked_sphere_point(p, z_in).real();
}

}  // namespace detail

inline RegionLabel classify_large_beta(const Problem& p, const Vec& z_in, double gamma) {
  (void)gamma;  // the large-β memberships do not depend on γ, only the guarantees do
  RealVec z = detail::real_sphere_point(p, z_in);
  const double n = p.n;
  RegionLabel lab;
  lab.regime = Regime::LargeBeta;
  lab.balance_inf = (z.cwiseAbs2().array() - 1.0 / n).abs().maxCoeff();
  lab.min_zk2 = z.cwiseAbs2().minCoeff();
  lab.r1 = lab.balance_inf <= 1.0 / (2.0 * n);
  lab.r3 = lab.min_zk2 <= (n - 1.0) / (4.0 * n * n);
  lab.r2 = lab.balance_inf >= 1.0 / (2.0 * n) && lab.min_zk2 >= (n - 1.0) / (4.0 * n * n);
  return lab;
}

inline RegionLabel classify_small_beta(const Problem& p, const Vec& z_in, double gamma) {
  RealVec z = detail::real_sphere_point(p, z_in);
  Spectrum s = spectrum(p);
  if (!(s.delta > 0.0))
    throw Error(ErrorKind::Precondition, "NoSpectralGap", "requires delta > 0");
  RegionLabel lab;
  lab.regime = Regime::SmallBeta;
  RealVec alpha = s.eigenvectors.real().transpose() * z;
  lab.alpha_min_sq = alpha(0) * alpha(0);  // coefficient on the smallest eigenvector
  RealVec Az = p.A.real() * z;
  double zAz = z.dot(Az);
  lab.grad_var = Az.squaredNorm() - zAz * zAz;
  lab.r1 = lab.alpha_min_sq >= ((2.0 + gamma) * p.beta + s.rho) / (s.delta + s.rho);
  lab.r2 = lab.grad_var >= std::pow((2.0 / 3.0 + gamma) * p.beta, 2);
  lab.r3 = lab.alpha_min_sq <= (s.delta - (4.0 + gamma) * p.beta) / (s.delta + s.rho);
  return lab;
}

struct NegativeDirection {
  Vec v;
  double hf = 0.0;
  bool asserted = false;  // true when the regime's β precondition held and the
                          // lemma bound hf ≤ −γ·(ρ or β) was verified
};

inline NegativeDirection negative_direction(const Problem& p, const Vec& z_in,
                                            Regime regime, double gamma) {
  RealVec z = detail::real_sphere_point(p, z_in);
  Spectrum s = spectrum(p);
  const int n = p.n;
  NegativeDirection out;
  RealVec v(n);
  if (regime == Regime::LargeBeta) {
    RegionLabel lab = classify_large_beta(p, z_in, gamma);
    if (!lab.r3)
      throw Error(ErrorKind::Precondition, "NotInRegion", "point is not in the large-beta R3");
    int imin = 0;
    for (int k = 1; k < n; ++k)
      if (z(k) * z(k) < z(imin) * z(imin)) imin = k;
    if (z(imin) * z(imin) < 1e-30) {
      v.setZero();
      v(imin) = 1.0;  // zero-component shortcut: e_k is tangent
    } else {
      double acc = (n - 1.0) * (n - 1.0) / (z(imin) * z(imin));
      for (int k = 0; k < n; ++k)
        if (k != imin) acc += 1.0 / (z(k) * z(k));
      double c = 1.0 / std::sqrt(acc);
      for (int k = 0; k < n; ++k) v(k) = k == imin ? -(n - 1.0) * c / z(imin) : c / z(k);
    }
    Vec vc = v.cast<Complex>();
    out.v = vc;
    out.hf = curvature_forms(p, checked_sphere_point(p, z_in), vc).hf;
    if (p.beta >= 2.0 * (1.0 + gamma) * s.rho * n) {
      out.asserted = out.hf <= -gamma * s.rho + 1e-12;
      if (!out.asserted)
        throw Error(ErrorKind::SolverFailure, "LemmaBoundViolated",
                    "constructed direction misses the -gamma*rho bound");
    }
    return out;
  }
  // small-beta regime
  if (!(s.delta > 0.0))
    throw Error(ErrorKind::Precondition, "NoSpectralGap", "requires delta > 0");
  RegionLabel lab = classify_small_beta(p, z_in, gamma);
  if (!lab.r3)
    throw Error(ErrorKind::Precondition, "NotInRegion", "point is not in the small-beta R3");
  RealMat P = s.eigenvectors.real();
  RealVec alpha = P.transpose() * z;
  double amin = alpha(0);  // smallest-eigenvalue coordinate
  double rest = std::sqrt(std::max(0.0, 1.0 - amin * amin));
  RealVec nu = RealVec::Zero(n);
  if (rest < 1e-14) {
    // z = ±p_min is in R1, never here; keep a guard anyway
    nu(1) = 1.0;
  } else {
    double eta = amin / rest;
    for (int k = 1; k < n; ++k) nu(k) = eta * alpha(k);
    nu(0) = -rest;
  }
  // note: coordinates are ascending here, so "n-th" (smallest) is index 0
  v = P * nu;
  Vec vc = (v / v.norm()).cast<Complex>();
  out.v = vc;
  out.hf = curvature_forms(p, checked_sphere_point(p, z_in), vc).hf;
  if (p.beta <= s.delta / (4.0 + gamma)) {
    out.asserted = out.hf <= -gamma * p.beta + 1e-12;
    if (!out.asserted)
      throw Error(ErrorKind::SolverFailure, "LemmaBoundViolated",
                  "constructed direction misses the -gamma*beta bound");
  }
  return out;
}

// Family of flat saddles showing the β = Ω(n^{3/2}) scaling is tight:
// stationary z with zero minimal tangent curvature at β = C n^{3/2−eps}.
struct Counterexample {
  Problem problem;
  Vec z;
};

inline Counterexample saddle_counterexample(int n, double C, double eps) {
  if (n < 2) throw Error(ErrorKind::Validation, "DimensionTooSmall", "requires n >= 2");
  if (!(C > 0.0) || !(eps > 0.0))
    throw Error(ErrorKind::Validation, "BadParameter", "requires C > 0 and eps > 0");
  double beta = C * std::pow(double(n), 1.5 - eps);
  double s = 3.0 * n - 2.0;
  RealVec z(n);
  z(0) = 1.0 / std::sqrt(s);
  for (int k = 1; k < n; ++k) z(k) = std::sqrt(3.0 / s);
  double q4 = z.cwiseAbs2().squaredNorm();  // ‖z‖₄⁴ = (9n−8)/(3n−2)²
  RealVec u = 2.0 * beta * q4 * z - 2.0 * beta * z.cwiseAbs2().cwiseProduct(z);
  RealVec w(n);
  w(0) = -std::sqrt((3.0 * n - 3.0) / s);
  for (int k = 1; k < n; ++k) w(k) = std::sqrt(1.0 / (s * (n - 1.0)));
  double alpha = -16.0 * beta / (s * s);
  RealMat A = alpha * w * w.transpose() + z * u.transpose() + u * z.transpose();
  Counterexample out;
  out.problem.n = n;
  out.problem.beta = beta;
  out.problem.field = Field::Real;
  out.problem.A = (0.5 * (A + A.transpose().eval())).cast<Complex>();
  out.z = z.cast<Complex>();
  validate_problem(out.problem);
  return out;
}

struct KlSample {
  double radius = 0.0;
  double df = 0.0;
  double grad_norm = 0.0;
};

struct KlConfig {
  // radii must keep |Δf| above the double rounding floor of f even for
  // quartically flat directions (Δf ~ r⁴), hence the fairly large range
  double r_min = 1e-3, r_max = 1e-1;
  int n_radii = 40;
  int n_dirs = 64;
  std::uint64_t seed = 0;
};

struct KlEstimate {
  double theta_hat = 0.0;
  double slope = 0.0;
  double eta_hat = 0.0;
  std::vector<KlSample> samples;
};

// Empirical KL exponent: around a stationary z sample y = retract(z, r v)
// over log-spaced radii; the direction set mixes random tangent vectors with
// the projected coordinate axes ±e_k (the slow directions always live in the
// small-modulus coordinates, which random draws essentially never align with).
// A sample (|Δf|, ‖g‖) certifies θ ≤ 1 − log‖g‖/log|Δf| (both logs negative),
// so the binding direction at each radius is the one maximizing that log
// ratio; a least-squares fit over those per-radius representatives in the
// (log|Δf|, log‖g‖) plane removes the constant-offset bias, and θ = 1 − slope.
inline KlEstimate kl_estimate(const Problem& p, const Vec& z_in, const KlConfig& cfg = {}) {
  Vec z = checked_sphere_point(p, z_in);
  if (riemannian_grad(p, z).norm > 1e-10)
    throw Error(ErrorKind::Precondition, "NotStationary",
                "kl_estimate requires grad_norm <= 1e-10 (polish first)");
  double f0 = objective(p, z);
  std::vector<Vec> dirs;
  for (int k = 0; k < p.n; ++k) {
    for (double sgn : {+1.0, -1.0}) {
      Vec e = Vec::Zero(p.n);
      e(k) = sgn;
      Vec t = tangent_project(z, e);
      if (t.norm() > 1e-8) dirs.push_back(t / t.norm());
      if (p.field == Field::Complex) {
        e(k) = Complex(0.0, sgn);
        t = tangent_project(z, e);
        if (t.norm() > 1e-8) dirs.push_back(t / t.norm());
      }
    }
  }
  Rng rng(cfg.seed, 0xA1);
  KlEstimate est;
  std::vector<std::pair<double, double>> envelope;  // (log|df|, log grad) per radius
  for (int ri = 0; ri < cfg.n_radii; ++ri) {
    double r = cfg.r_min * std::pow(cfg.r_max / cfg.r_min,
                                    cfg.n_radii > 1 ? double(ri) / (cfg.n_radii - 1) : 0.0);
    double best_ratio = -std::numeric_limits<double>::infinity();
    double best_ldf = 0.0, best_lg = 0.0;
    auto consider = [&](const Vec& v) {
      Vec y = retract(z, r * v);
      double df = std::abs(objective(p, y) - f0);
      double gn = riemannian_grad(p, y).norm;
      // below ~100 ulp of f the computed difference is rounding noise
      if (df <= 1e-13 * (1.0 + std::abs(f0)) || gn <= 1e-280) return;
      double ldf = std::log(df), lg = std::log(gn);
      if (ldf >= -1e-3 || lg >= 0.0) return;  // only meaningful below scale one
      est.samples.push_back({r, df, gn});
      double ratio = lg / ldf;
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best_ldf = ldf;
        best_lg = lg;
      }
    };
    for (const Vec& v : dirs) consider(v);
    int n_random = std::max(0, cfg.n_dirs - static_cast<int>(dirs.size()));
    for (int d = 0; d < n_random; ++d) {
      Vec u(p.n);
      for (int i = 0; i < p.n; ++i)
        u(i) = p.field == Field::Real ? Complex(rng.normal(), 0.0)
                                      : Complex(rng.normal(), rng.normal());
      Vec t = tangent_project(z, u);
      if (t.norm() < 1e-12) continue;
      consider(t / t.norm());
    }
    if (std::isfinite(best_ratio)) envelope.emplace_back(best_ldf, best_lg);
  }
  if (est.samples.size() < 100)
    throw Error(ErrorKind::SolverFailure, "TooFewSamples",
                "fewer than 100 valid (df, grad) pairs");
  // least-squares slope over the envelope points
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : envelope) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double m = envelope.size();
  double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-12)
    throw Error(ErrorKind::SolverFailure, "TooFewSamples", "degenerate envelope");
  est.slope = (m * sxy - sx * sy) / denom;
  est.theta_hat = std::clamp(1.0 - est.slope, 1e-6, 1.0 - 1e-6);
  est.eta_hat = 0.0;
  for (const KlSample& s : est.samples)
    est.eta_hat = std::max(est.eta_hat, std::pow(s.df, 1.0 - est.theta_hat) / s.grad_norm);
  return est;
}

struct KlSlimResult {
  double eta_emp = 0.0;
  KlSample worst;
};

// Empirical constant in ‖τ‖^{3/2} ≤ η ‖P_y⊥ diag(τ) y‖ with τ = |y|² − |z|².
inline KlSlimResult kl_slim_check(const Vec& z_in, const KlConfig& cfg = {}) {
  Vec z = z_in;
  double nrm = z.norm();
  if (std::abs(nrm - 1.0) > 1e-10)
    throw Error(ErrorKind::Validation, "NotUnit", "point must be on the sphere");
  z /= nrm;
  const int n = static_cast<int>(z.size());
  Rng rng(cfg.seed, 0x51);
  KlSlimResult out;
  int valid = 0;
  for (int ri = 0; ri < cfg.n_radii; ++ri) {
    double r = cfg.r_min * std::pow(cfg.r_max / cfg.r_min,
                                    cfg.n_radii > 1 ? double(ri) / (cfg.n_radii - 1) : 0.0);
    for (int d = 0; d < cfg.n_dirs; ++d) {
      Vec u(n);
      for (int i = 0; i < n; ++i) u(i) = Complex(rng.normal(), rng.normal());
      Vec t = u - z.dot(u).real() / z.squaredNorm() * z;
      if (t.norm() < 1e-12) continue;
      Vec y = z + (r / t.norm()) * t;
      y /= y.norm();
      RealVec tau = y.cwiseAbs2() - z.cwiseAbs2();
      Vec dy = tau.cast<Complex>().cwiseProduct(y);
      Vec proj = dy - y.dot(dy) * y;  // P_y⊥ in the complex sense
      double den = proj.norm();
      if (den <= 1e-14) continue;
      ++valid;
      double ratio = std::pow(tau.norm(), 1.5) / den;
      if (ratio > out.eta_emp) {
        out.eta_emp = ratio;
        out.worst = {r, tau.norm(), den};
      }
    }
  }
  if (valid < 100)
    throw Error(ErrorKind::SolverFailure, "TooFewSamples", "fewer than 100 valid samples");
  return out;
}

}  // namespace qqs

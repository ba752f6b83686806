#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "qqsphere/certify.hpp"

// First-order sphere solver (Armijo line search on the projection retraction),
// Newton polishing of the stationarity system, and a multistart cataloger that
// harvests minima, saddles (plateau + escape restarts) and maxima (descent on
// −f) into a deduplicated critical-point catalog.

namespace qqs {

struct SolverConfig {
  int max_iters = 5000;
  double grad_tol = 1e-10;
  double armijo_c1 = 1e-4;
  double armijo_shrink = 0.5;
  double armijo_init = 1.0;
  bool polish = true;
  std::uint64_t seed = 0;
  // multistart scope: saddle_search adds ascent and Lagrange-Newton phases
  // (needed for complete stationary catalogs); escape_rounds restarts descent
  // from both sides of each negative-curvature direction found
  bool saddle_search = true;
  int escape_rounds = 2;
};

struct DescentResult {
  Vec z;
  double f = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  // iterate with the smallest gradient norm seen before the final one; used
  // by multistart to harvest saddle plateaus the trajectory later escaped
  Vec plateau;
  double plateau_grad = std::numeric_limits<double>::infinity();
};

namespace detail {

// Descent on sign*f. sign=-1 finds maxima of f with the same machinery.
inline DescentResult descent_impl(const Problem& p, Vec z, const SolverConfig& cfg,
                                  double sign) {
  auto fval = [&](const Vec& y) { return sign * objective(p, y); };
  DescentResult res;
  double f = fval(z);
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    GradResult g = riemannian_grad(p, z);
    double gnorm = g.norm;
    if (gnorm <= cfg.grad_tol) break;
    if (gnorm < res.plateau_grad && gnorm < 1e-4) {
      res.plateau_grad = gnorm;
      res.plateau = z;
    }
    Vec dir = -sign * g.g;  // steepest descent for sign*f
    double gg = g.g.squaredNorm();
    double t = cfg.armijo_init;
    bool moved = false;
    while (t >= 1e-16) {
      Vec cand = retract(z, t * dir);
      double fc = fval(cand);
      if (fc <= f - cfg.armijo_c1 * t * gg) {
        z = cand;
        f = fc;
        moved = true;
        break;
      }
      t *= cfg.armijo_shrink;
    }
    if (!moved) {
      // f differences underflow near stationarity; a stall there is convergence
      if (gnorm <= 1e-7) break;
      throw Error(ErrorKind::SolverFailure, "LineSearchStalled",
                  "no sufficient decrease above step 1e-16");
    }
  }
  res.z = z;
  res.f = objective(p, z);
  res.grad_norm = riemannian_grad(p, z).norm;
  res.iters = it;
  return res;
}

}  // namespace detail

inline DescentResult gradient_descent(const Problem& p, const Vec& z0,
                                      const SolverConfig& cfg = {}) {
  Vec z = checked_sphere_point(p, z0);
  return detail::descent_impl(p, z, cfg, +1.0);
}

struct PolishResult {
  Vec z;
  bool converged = false;
  int iters = 0;
};

// Riemannian Newton on the stationarity residual: solve (QᵀMQ) s = −Qᵀg in
// the tangent basis, retract, repeat. The complex phase direction makes the
// projected Hessian singular, so a complete orthogonal decomposition
// (minimum-norm least squares) is used throughout.
inline PolishResult newton_polish(const Problem& p, const Vec& z_in,
                                  const SolverConfig& cfg = {}) {
  (void)cfg;
  Vec z = checked_sphere_point(p, z_in);
  if (riemannian_grad(p, z).norm > 1e-4)
    throw Error(ErrorKind::Precondition, "NotInBasin",
                "newton_polish requires grad_norm <= 1e-4");
  PolishResult res;
  for (int it = 0; it < 50; ++it) {
    GradResult g = riemannian_grad(p, z);
    if (g.norm <= 1e-12) {
      res.z = z;
      res.converged = true;
      res.iters = it;
      return res;
    }
    RealifiedTangentForm form = realified_tangent_form(p, z);
    RealMat Q = tangent_basis(form.normal);
    RealMat B = Q.transpose() * form.M * Q;
    RealVec rhs = -Q.transpose() * field_to_real_coords(p, g.g);
    Eigen::CompleteOrthogonalDecomposition<RealMat> cod(B);
    cod.setThreshold(1e-12);
    RealVec s = cod.solve(rhs);
    if (!s.allFinite()) break;
    // guard against wild steps far outside the basin
    if (s.norm() > 0.5) s *= 0.5 / s.norm();
    Vec step = real_coords_to_field(p, Q * s);
    z = retract(z, step);
  }
  res.z = z;
  res.converged = riemannian_grad(p, z).norm <= 1e-12;
  return res;
}

struct CatalogEntry {
  Vec z;
  double f = 0.0;
  double grad_norm = 0.0;
  double mu_min = 0.0;
  StationaryLabel label = StationaryLabel::NotStationary;
  bool is_minimum = false;  // label==StrictLocalMin, or its complex quotient analogue
};

struct CriticalCatalog {
  std::vector<CatalogEntry> points;
  int n_stationary = 0;
  int n_minima = 0;
  double dedup_tol = 1e-6;
  int n_starts = 0;
};

namespace detail {

inline double catalog_distance(Field field, const Vec& a, const Vec& b) {
  if (field == Field::Real) return (a - b).norm();
  // modulo global phase: min over φ of ‖a − e^{iφ}b‖ = √(2 − 2|a*b|)
  double c = std::min(std::abs(a.dot(b)), 1.0);
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * c));
}

// For complex problems the phase direction always has zero curvature, so the
// "strict" minimum test is run on the quotient: smallest curvature eigenvalue
// restricted to the tangent space with the iz direction projected out.
inline double quotient_mu_min(const Problem& p, const Vec& z) {
  RealifiedTangentForm form = realified_tangent_form(p, z);
  int m = static_cast<int>(form.normal.size());
  if (m <= 2) return std::numeric_limits<double>::infinity();  // n=1: only the phase circle
  RealVec phase = field_to_real_coords(p, Complex(0, 1) * z);
  RealMat N(m, 2);
  N.col(0) = form.normal;
  N.col(1) = phase - form.normal * form.normal.dot(phase);
  double nn = N.col(1).norm();
  if (nn < 1e-12) return 0.0;
  N.col(1) /= nn;
  Eigen::HouseholderQR<RealMat> qr(N);
  RealMat Qfull = qr.householderQ();
  RealMat Q = Qfull.rightCols(m - 2);
  Eigen::SelfAdjointEigenSolver<RealMat> es(Q.transpose() * form.M * Q);
  return es.eigenvalues()(0);
}

// Newton on the bordered Lagrange system [ĝ(z) − 2λz; sphere constraint] with
// λ free, in realified coordinates. Unlike descent it converges to stationary
// points of every index, so random starts reach saddles and maxima directly.
inline std::optional<Vec> stationary_newton(const Problem& p, Vec z, int iters = 60) {
  double nrm = z.norm();
  if (nrm < 1e-12) return std::nullopt;
  z /= nrm;
  double lambda = multiplier(p, z);
  for (int it = 0; it < iters; ++it) {
    GradResult g = riemannian_grad(p, z);
    Vec ghat = p.A * z + 2.0 * p.beta * z.cwiseAbs2().cast<Complex>().cwiseProduct(z);
    Vec r1c = ghat - 2.0 * lambda * z;
    if (g.norm <= 1e-12 && r1c.norm() <= 1e-10) return z;
    RealifiedTangentForm form = realified_tangent_form(p, z);
    int m = static_cast<int>(form.normal.size());
    double lam_here = multiplier(p, z);
    RealMat J(m + 1, m + 1);
    J.topLeftCorner(m, m) = form.M;
    J.topLeftCorner(m, m).diagonal().array() += 2.0 * (lam_here - lambda);
    RealVec x = field_to_real_coords(p, z);
    J.topRightCorner(m, 1) = -2.0 * x;
    J.bottomLeftCorner(1, m) = -x.transpose();
    J(m, m) = 0.0;
    RealVec rhs(m + 1);
    rhs.head(m) = -field_to_real_coords(p, r1c);
    rhs(m) = 0.0;
    Eigen::CompleteOrthogonalDecomposition<RealMat> cod(J);
    cod.setThreshold(1e-12);
    RealVec step = cod.solve(rhs);
    if (!step.allFinite()) return std::nullopt;
    double sn = step.head(m).norm();
    if (sn > 0.5) step *= 0.5 / sn;  // damp far from the solution
    Vec znew = z + real_coords_to_field(p, step.head(m));
    double zn = znew.norm();
    if (zn < 1e-12) return std::nullopt;
    z = znew / zn;
    lambda += step(m);
  }
  return riemannian_grad(p, z).norm <= 1e-12 ? std::optional<Vec>(z) : std::nullopt;
}

inline Vec random_start(const Problem& p, Rng& rng) {
  Vec z(p.n);
  for (int i = 0; i < p.n; ++i)
    z(i) = p.field == Field::Real ? Complex(rng.normal(), 0.0)
                                  : Complex(rng.normal(), rng.normal());
  double nrm = z.norm();
  if (nrm < 1e-12) {
    z.setZero();
    z(0) = 1.0;
    return z;
  }
  return z / nrm;
}

}  // namespace detail

inline CriticalCatalog multistart(const Problem& p, int n_starts,
                                  const SolverConfig& cfg = {}) {
  if (n_starts < 1)
    throw Error(ErrorKind::Validation, "BadStartCount", "n_starts must be >= 1");
  validate_problem(p);
  CriticalCatalog cat;
  cat.n_starts = n_starts;
  cat.dedup_tol = 1e-6;

  std::vector<Vec> found;  // polished stationary points (pre-dedup merge below)
  auto try_add = [&](const Vec& z) -> int {
    for (std::size_t i = 0; i < found.size(); ++i)
      if (detail::catalog_distance(p.field, found[i], z) <= cat.dedup_tol)
        return static_cast<int>(i);
    found.push_back(z);
    return static_cast<int>(found.size()) - 1;
  };
  auto polish_candidate = [&](const Vec& z) {
    if (riemannian_grad(p, z).norm > 1e-4) return;
    PolishResult pr = newton_polish(p, z, cfg);
    if (pr.converged) try_add(pr.z);
  };

  SolverConfig run_cfg = cfg;
  run_cfg.grad_tol = std::max(cfg.grad_tol, 1e-9);

  Rng root(cfg.seed, 0xC0FFEE);
  auto run_one = [&](Vec z0, double sign) {
    try {
      DescentResult dr = detail::descent_impl(p, z0, run_cfg, sign);
      if (dr.plateau_grad < 1e-4 &&
          detail::catalog_distance(p.field, dr.plateau, dr.z) > 1e-3)
        polish_candidate(dr.plateau);  // saddle plateau the trajectory escaped
      polish_candidate(dr.z);
    } catch (const Error&) {
      // line-search stalls on pathological starts are skipped, not fatal
    }
  };

  for (int s = 0; s < n_starts; ++s) {
    Rng rng = root.stream(static_cast<std::uint64_t>(s));
    run_one(detail::random_start(p, rng), +1.0);
  }
  if (cfg.saddle_search) {
    // maxima via the same machinery on −f (fewer starts suffice: the catalog
    // of maxima of f is the minima catalog of the reversed problem)
    int max_starts = std::max(1, n_starts / 5);
    for (int s = 0; s < max_starts; ++s) {
      Rng rng = root.stream(0x10000000ull + static_cast<std::uint64_t>(s));
      run_one(detail::random_start(p, rng), -1.0);
    }

    // Lagrange-Newton phase: converges to saddles and maxima that descent
    // trajectories only pass near
    for (int s = 0; s < n_starts; ++s) {
      Rng rng = root.stream(0x20000000ull + static_cast<std::uint64_t>(s));
      if (auto zs = detail::stationary_newton(p, detail::random_start(p, rng)))
        try_add(*zs);
    }
  }

  // saddle-escape restarts: descend from both sides of each negative direction
  std::size_t frontier_begin = 0;
  for (int round = 0; round < cfg.escape_rounds; ++round) {
    std::size_t frontier_end = found.size();
    for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
      Vec z = found[i];
      MinCurvature mc = tangent_min_curvature(p, z);
      if (mc.mu_min < -1e-6) {
        for (double sgn : {+1.0, -1.0})
          run_one(retract(z, sgn * 1e-3 * mc.v_min), +1.0);
      }
    }
    frontier_begin = frontier_end;
    if (frontier_end == found.size()) break;
  }

  for (const Vec& z : found) {
    CatalogEntry e;
    e.z = z;
    e.f = objective(p, z);
    StationaryCertificate cert = certify_point(p, z);
    e.grad_norm = cert.grad_norm;
    e.mu_min = cert.mu_min;
    e.label = cert.label;
    if (p.field == Field::Real)
      e.is_minimum = cert.label == StationaryLabel::StrictLocalMin;
    else
      e.is_minimum = cert.label != StationaryLabel::NotStationary &&
                     cert.mu_min > -1e-8 && detail::quotient_mu_min(p, z) > 1e-8;
    cat.points.push_back(std::move(e));
  }
  std::sort(cat.points.begin(), cat.points.end(), [](const CatalogEntry& a,
                                                     const CatalogEntry& b) {
    if (a.f != b.f) return a.f < b.f;
    for (int k = 0; k < a.z.size(); ++k) {
      double ma = std::abs(a.z(k)), mb = std::abs(b.z(k));
      if (ma != mb) return ma < mb;
      if (a.z(k).real() != b.z(k).real()) return a.z(k).real() < b.z(k).real();
    }
    return false;
  });
  for (const CatalogEntry& e : cat.points) {
    if (e.grad_norm <= 1e-10) ++cat.n_stationary;
    if (e.is_minimum) ++cat.n_minima;
  }
  return cat;
}

inline double minima_gap(const CriticalCatalog& cat) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const CatalogEntry& e : cat.points)
    if (e.is_minimum) {
      lo = std::min(lo, e.f);
      hi = std::max(hi, e.f);
    }
  if (!std::isfinite(lo))
    throw Error(ErrorKind::Precondition, "EmptyCatalog", "no minima in catalog");
  return (hi - lo) / lo;
}

}  // namespace qqs

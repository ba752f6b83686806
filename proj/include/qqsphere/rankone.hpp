#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "qqsphere/solve.hpp"

// A = a a*: existence and construction of orthogonal local minima (a*z = 0),
// phase alignment ("consistent" points), and a reduced real solver for the
// non-orthogonal regime.

namespace qqs {

struct RankOneVector {
  Vec a;
  double norm1 = 0.0, norm2 = 0.0, norm_inf = 0.0;

  explicit RankOneVector(Vec v) : a(std::move(v)) {
    norm1 = a.cwiseAbs().sum();
    norm2 = a.norm();
    norm_inf = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  }
};

inline Problem rankone_problem(const RankOneVector& a, double beta, Field field) {
  Problem p;
  p.n = static_cast<int>(a.a.size());
  p.beta = beta;
  p.field = field;
  p.A = a.a * a.a.adjoint();
  p.A = Complex(0.5, 0.0) * (p.A + p.A.adjoint().eval());
  if (field == Field::Real) p.A.imag().setZero();
  return p;
}

enum class OrthogonalVerdict { BalancedPhases, SingleSpike, None };

struct OrthogonalExistence {
  OrthogonalVerdict verdict = OrthogonalVerdict::None;
  int spike_index = -1;       // SingleSpike: the unique nonzero component
  double balanced_slack = 0;  // ½‖a‖₁ − ‖a‖_∞
  double spike_slack = 0;     // ‖a‖² − 2β/(n−1)
};

inline OrthogonalExistence orthogonal_minimum_exists(const RankOneVector& a, double beta,
                                                     int n) {
  if (n < 2)
    throw Error(ErrorKind::Precondition, "DimensionTooSmall",
                "orthogonal minima need n >= 2");
  if (!(beta > 0.0)) throw Error(ErrorKind::Validation, "NonPositiveBeta", "beta must be > 0");
  OrthogonalExistence out;
  out.balanced_slack = 0.5 * a.norm1 - a.norm_inf;
  if (out.balanced_slack >= 0.0) {
    out.verdict = OrthogonalVerdict::BalancedPhases;
    return out;
  }
  int nonzero = 0, idx = -1;
  for (int k = 0; k < n; ++k)
    if (std::abs(a.a(k)) > 0.0) {
      ++nonzero;
      idx = k;
    }
  out.spike_slack = a.norm2 * a.norm2 - 2.0 * beta / (n - 1);
  if (nonzero == 1 && out.spike_slack >= 0.0) {
    out.verdict = OrthogonalVerdict::SingleSpike;
    out.spike_index = idx;
  }
  return out;
}

// Phases θ with Σ e^{iθ_k} a_k = 0, available whenever ‖a‖_∞ ≤ ½‖a‖₁.
// The moduli are split into three groups whose sums satisfy the triangle
// inequality (greedy balanced partition), each group shares one direction,
// and the directions close the triangle via the law of cosines.
inline RealVec zero_sum_phases(const RankOneVector& a) {
  const int n = static_cast<int>(a.a.size());
  if (a.norm_inf > 0.5 * a.norm1 + 1e-15 * a.norm1)
    throw Error(ErrorKind::Precondition, "ConditionViolated",
                "requires ||a||_inf <= ||a||_1 / 2");
  std::vector<int> nz;
  for (int k = 0; k < n; ++k)
    if (std::abs(a.a(k)) > 0.0) nz.push_back(k);
  RealVec theta = RealVec::Zero(n);
  auto assign = [&](int k, double dir) { theta(k) = dir - std::arg(a.a(k)); };
  if (nz.empty()) return theta;
  if (nz.size() == 1)
    throw Error(ErrorKind::Precondition, "ConditionViolated",
                "a single nonzero component cannot cancel");
  if (nz.size() == 2) {
    if (std::abs(std::abs(a.a(nz[0])) - std::abs(a.a(nz[1]))) > 1e-12 * a.norm1)
      throw Error(ErrorKind::Precondition, "DegenerateTwoPoint",
                  "two nonzero components must have equal modulus");
    assign(nz[0], 0.0);
    assign(nz[1], M_PI);
    return theta;
  }
  // Greedy balanced 3-partition of the moduli, largest first. With
  // max ≤ ½·total each group sum ends up ≤ ½·total, so the three sums are
  // sides of a (possibly degenerate) triangle.
  std::sort(nz.begin(), nz.end(),
            [&](int i, int j) { return std::abs(a.a(i)) > std::abs(a.a(j)); });
  double sum[3] = {0, 0, 0};
  std::vector<int> group[3];
  for (int k : nz) {
    int g = 0;
    if (sum[1] < sum[g]) g = 1;
    if (sum[2] < sum[g]) g = 2;
    sum[g] += std::abs(a.a(k));
    group[g].push_back(k);
  }
  double b1 = sum[0], b2 = sum[1], b3 = sum[2];
  // group directions: group0 at angle 0; group1 rotated by the interior
  // angle closing onto −(v0+v1); group2 takes whatever closes the triangle
  double dir0 = 0.0, dir1 = M_PI, dir2 = 0.0;
  if (b2 > 0.0 && b1 > 0.0) {
    double c = (b3 * b3 - b1 * b1 - b2 * b2) / (2.0 * b1 * b2);
    c = std::clamp(c, -1.0, 1.0);
    dir1 = std::acos(c);  // non-negative-imaginary-part orientation
  }
  Complex partial = b1 * std::polar(1.0, dir0) + b2 * std::polar(1.0, dir1);
  dir2 = std::abs(partial) > 0.0 ? std::arg(-partial) : 0.0;
  for (int k : group[0]) assign(k, dir0);
  for (int k : group[1]) assign(k, dir1);
  for (int k : group[2]) assign(k, dir2);
  return theta;
}

inline Vec build_orthogonal_minimizer(const RankOneVector& a, double beta, int n) {
  OrthogonalExistence ex = orthogonal_minimum_exists(a, beta, n);
  if (ex.verdict == OrthogonalVerdict::None)
    throw Error(ErrorKind::Precondition, "NoOrthogonalMinimum",
                "neither existence condition holds");
  Vec z(n);
  if (ex.verdict == OrthogonalVerdict::BalancedPhases) {
    RealVec theta = zero_sum_phases(a);
    double r = 1.0 / std::sqrt(double(n));
    // a*z = conj(Σ e^{iθ_k} a_k) / √n = 0
    for (int k = 0; k < n; ++k) z(k) = std::polar(r, -theta(k));
  } else {
    double r = 1.0 / std::sqrt(double(n - 1));
    for (int k = 0; k < n; ++k) z(k) = k == ex.spike_index ? 0.0 : r;
  }
  return z;
}

// Global phase alignment (and phase reset off the support of a) so that
// conj(a_k) z_k is real wherever a_k ≠ 0 and z_k is real where a_k = 0.
inline Vec make_consistent(const RankOneVector& a, double beta, const Vec& z_in,
                           Field field = Field::Complex) {
  Problem p = rankone_problem(a, beta, field);
  Vec z = checked_sphere_point(p, z_in);
  if (riemannian_grad(p, z).norm > 1e-8)
    throw Error(ErrorKind::Precondition, "NotStationary",
                "make_consistent requires a stationary point");
  Complex overlap = a.a.dot(z);  // a*z
  Vec out = z;
  if (std::abs(overlap) > 1e-12) out *= std::conj(overlap) / std::abs(overlap);
  for (int k = 0; k < p.n; ++k)
    if (std::abs(a.a(k)) == 0.0) out(k) = std::abs(out(k));
  return out;
}

enum class RankOneMode { Orthogonal, ConsistentNumeric };

struct RankOneSolution {
  Vec z;
  double f_star = 0.0;
  RankOneMode mode = RankOneMode::Orthogonal;
};

// Global solve for A = aa*: the orthogonal construction when it exists (those
// points are the only global minima then); otherwise the consistency
// reduction to a real problem in the moduli-with-sign coordinates.
inline RankOneSolution solve_rankone(const RankOneVector& a, double beta, int n,
                                     const SolverConfig& cfg = {}, int n_starts = 128) {
  RankOneSolution sol;
  OrthogonalExistence ex = orthogonal_minimum_exists(a, beta, n);
  if (ex.verdict != OrthogonalVerdict::None) {
    sol.z = build_orthogonal_minimizer(a, beta, n);
    sol.mode = RankOneMode::Orthogonal;
    sol.f_star = objective(rankone_problem(a, beta, Field::Complex), sol.z);
    return sol;
  }
  // reduced problem over the real sphere with |a| as data
  Vec amod = a.a.cwiseAbs().cast<Complex>();
  RankOneVector ar(amod);
  Problem reduced = rankone_problem(ar, beta, Field::Real);
  CriticalCatalog cat = multistart(reduced, n_starts, cfg);
  const CatalogEntry* best = nullptr;
  for (const CatalogEntry& e : cat.points)
    if (e.grad_norm <= 1e-10 && (!best || e.f < best->f)) best = &e;
  if (!best)
    throw Error(ErrorKind::SolverFailure, "SolverFailed",
                "multistart produced no stationary point");
  sol.mode = RankOneMode::ConsistentNumeric;
  sol.z = Vec(n);
  for (int k = 0; k < n; ++k) {
    double phase = std::abs(a.a(k)) > 0.0 ? std::arg(a.a(k)) : 0.0;
    sol.z(k) = best->z(k).real() * std::polar(1.0, phase);
  }
  sol.f_star = objective(rankone_problem(a, beta, Field::Complex), sol.z);
  return sol;
}

}  // namespace qqs

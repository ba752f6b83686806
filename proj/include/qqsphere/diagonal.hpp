#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "qqsphere/solve.hpp"

// Diagonal A: substituting u_k = |z_k|² turns the problem into the convex
// program min ½aᵀu + (β/2)‖u‖² over the simplex, solved exactly by Euclidean
// projection of −a/(2β). Stationary classes are enumerable by support set.

namespace qqs {

inline bool is_diagonal(const Problem& p) {
  double amax = p.A.diagonal().cwiseAbs().maxCoeff();
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j)
      if (i != j && std::abs(p.A(i, j)) > 1e-12 * (1.0 + amax)) return false;
  return true;
}

inline RealVec diagonal_entries(const Problem& p) {
  if (!is_diagonal(p))
    throw Error(ErrorKind::Validation, "NotDiagonal", "A has off-diagonal entries");
  return p.A.diagonal().real();
}

// Euclidean projection onto {u ≥ 0, Σu = 1} by sort-and-threshold, O(n log n).
inline RealVec project_simplex(const RealVec& v) {
  if (!v.allFinite())
    throw Error(ErrorKind::Validation, "NonFinite", "projection input has non-finite entries");
  const int n = static_cast<int>(v.size());
  std::vector<double> s(v.data(), v.data() + n);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double running = 0.0, tau = 0.0;
  int m = 0;
  for (int j = 0; j < n; ++j) {
    running += s[j];
    double t = (running - 1.0) / (j + 1);
    if (s[j] - t > 0.0) {
      m = j + 1;
      tau = t;
    }
  }
  (void)m;
  return (v.array() - tau).cwiseMax(0.0);
}

struct DiagonalSolution {
  RealVec u;
  double f_star = 0.0;
  double lambda = 0.0;
};

inline DiagonalSolution solve_diagonal(const Problem& p) {
  RealVec a = diagonal_entries(p);
  DiagonalSolution sol;
  sol.u = project_simplex(-a / (2.0 * p.beta));
  sol.f_star = 0.5 * a.dot(sol.u) + 0.5 * p.beta * sol.u.squaredNorm();
  // on the support, a_k + 2β u_k is the constant 2λ
  for (int k = 0; k < p.n; ++k)
    if (sol.u(k) > 0.0) {
      sol.lambda = 0.5 * (a(k) + 2.0 * p.beta * sol.u(k));
      break;
    }
  return sol;
}

struct DiagonalStationaryClass {
  std::vector<int> support;
  RealVec u;
  double lambda = 0.0;
  double f_value = 0.0;
  bool boundary_tie = false;  // some u_k = 1 within 1e-12, or tied a_k on support
};

inline std::vector<DiagonalStationaryClass> enumerate_stationary_diagonal(const Problem& p,
                                                                          int n_cap = 20) {
  RealVec a = diagonal_entries(p);
  if (p.n > n_cap)
    throw Error(ErrorKind::Precondition, "DimensionTooLarge",
                "support enumeration is 2^n - 1; raise n_cap explicitly if intended");
  std::vector<DiagonalStationaryClass> classes;
  for (std::uint64_t mask = 1; mask < (1ull << p.n); ++mask) {
    double asum = 0.0;
    int size = 0;
    for (int k = 0; k < p.n; ++k)
      if (mask >> k & 1) {
        asum += a(k);
        ++size;
      }
    double lambda = (2.0 * p.beta + asum) / (2.0 * size);
    DiagonalStationaryClass cls;
    cls.u = RealVec::Zero(p.n);
    bool ok = true;
    for (int k = 0; k < p.n && ok; ++k)
      if (mask >> k & 1) {
        double uk = (2.0 * lambda - a(k)) / (2.0 * p.beta);
        if (uk <= 0.0 || uk > 1.0 + 1e-14) ok = false;
        cls.u(k) = std::min(uk, 1.0);
        cls.support.push_back(k);
        if (uk >= 1.0 - 1e-12) cls.boundary_tie = true;
      }
    if (!ok) continue;
    cls.lambda = lambda;
    cls.f_value = 0.5 * a.dot(cls.u) + 0.5 * p.beta * cls.u.squaredNorm();
    // flag exact diagonal ties on the support (degenerate classes)
    for (std::size_t i = 1; i < cls.support.size() && !cls.boundary_tie; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (a(cls.support[i]) == a(cls.support[j])) {
          cls.boundary_tie = true;
          break;
        }
    classes.push_back(std::move(cls));
  }
  std::sort(classes.begin(), classes.end(),
            [](const DiagonalStationaryClass& x, const DiagonalStationaryClass& y) {
              if (x.f_value != y.f_value) return x.f_value < y.f_value;
              return x.support < y.support;
            });
  return classes;
}

// Realizes a moduli-squared vector as a sphere point (phases all zero).
inline Vec realize_moduli(const RealVec& u) {
  Vec z(u.size());
  for (int k = 0; k < u.size(); ++k) z(k) = std::sqrt(std::max(u(k), 0.0));
  return z / z.norm();
}

struct PerturbationTrial {
  Mat W;
  double sigma = 0.0;
  Vec y;
  double lhs = 0.0;  // min over ⟦z₀⟧ of ‖y − z‖₄
  double rhs = 0.0;  // (2 σ β⁻¹ ‖W‖₂ n^{1/4})^{1/3}
  bool improved = true;
};

inline PerturbationTrial perturbation_check(const Problem& p, double sigma,
                                            std::uint64_t seed) {
  RealVec a = diagonal_entries(p);
  if (sigma < 0.0)
    throw Error(ErrorKind::Validation, "NegativeSigma", "sigma must be >= 0");
  PerturbationTrial trial;
  trial.sigma = sigma;
  // Hermitian noise: standard complex normal off-diagonal, zero diagonal
  Rng rng(seed, 0x9E37);
  trial.W = Mat::Zero(p.n, p.n);
  for (int i = 0; i < p.n; ++i)
    for (int j = i + 1; j < p.n; ++j) {
      Complex w(rng.normal() / std::sqrt(2.0), rng.normal() / std::sqrt(2.0));
      trial.W(i, j) = w;
      trial.W(j, i) = std::conj(w);
    }
  DiagonalSolution sol = solve_diagonal(p);
  Vec z0 = realize_moduli(sol.u);

  Problem pert;
  pert.n = p.n;
  pert.beta = p.beta;
  pert.field = Field::Complex;
  pert.A = p.A + Complex(sigma, 0.0) * trial.W;

  double f0 = objective(pert, z0);
  SolverConfig cfg;
  cfg.seed = seed;
  Vec best = z0;
  double fbest = f0;
  auto consider = [&](const Vec& start) {
    try {
      DescentResult dr = gradient_descent(pert, start, cfg);
      Vec y = dr.z;
      if (dr.grad_norm <= 1e-4) {
        PolishResult pr = newton_polish(pert, y, cfg);
        if (pr.converged) y = pr.z;
      }
      double fy = objective(pert, y);
      if (fy < fbest) {
        fbest = fy;
        best = y;
      }
    } catch (const Error&) {
    }
  };
  consider(z0);
  Rng srng(seed, 0x51AB);
  for (int s = 0; s < 8; ++s) consider(detail::random_start(pert, srng));

  trial.improved = fbest <= f0;
  trial.y = best;
  // lhs: phases are free inside ⟦z₀⟧, so the 4-norm distance minimizes
  // componentwise to | |y_k| − |z0_k| |
  double acc = 0.0;
  for (int k = 0; k < p.n; ++k) acc += std::pow(std::abs(best(k)) - std::abs(z0(k)), 4);
  trial.lhs = std::pow(acc, 0.25);
  double wnorm = 0.0;
  if (sigma > 0.0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(trial.W);
    wnorm = es.eigenvalues().cwiseAbs().maxCoeff();
  }
  trial.rhs = std::cbrt(2.0 * sigma / p.beta * wnorm * std::pow(double(p.n), 0.25));
  return trial;
}

}  // namespace qqs

#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "qqsphere/calculus.hpp"

// Optimality certificates at a candidate point:
//  - second order: exact min tangent curvature (Lemma-level, eigenvalue based),
//  - global: H = A + 2β diag(|z|²) − 2λI ⪰ 0 certifies a global minimum,
//  - fourth order: sign conditions on H_f, H₃, H₄ and the mixed form H₃(v,w)
//    over the curvature nullspace. Quantified-over-sphere conditions are
//    checked on a dense tangent grid for real n ≤ 3 (oracle-grade) and by
//    seeded multistart hill climbing otherwise; Fail verdicts always carry a
//    recomputed witness, Pass verdicts are exhaustive only on the dense path.

namespace qqs {

enum class StationaryLabel { StrictLocalMin, Saddle, Degenerate, NotStationary };
enum class GlobalCert { Certified, Refuted, NotApplicable };

inline const char* label_name(StationaryLabel l) {
  switch (l) {
    case StationaryLabel::StrictLocalMin: return "strict-local-min";
    case StationaryLabel::Saddle: return "saddle";
    case StationaryLabel::Degenerate: return "degenerate";
    case StationaryLabel::NotStationary: return "not-stationary";
  }
  return "?";
}

inline const char* global_cert_name(GlobalCert g) {
  switch (g) {
    case GlobalCert::Certified: return "certified";
    case GlobalCert::Refuted: return "refuted";
    case GlobalCert::NotApplicable: return "not-applicable";
  }
  return "?";
}

struct StationaryCertificate {
  double grad_norm = 0.0;
  double lambda = 0.0;
  double mu_min = 0.0;    // exact min of H_f over unit tangent directions
  double h_min_eig = 0.0; // smallest eigenvalue of H = A + 2β diag(|z|²) − 2λI
  StationaryLabel label = StationaryLabel::NotStationary;
  GlobalCert global_ok = GlobalCert::NotApplicable;
};

inline StationaryCertificate certify_point(const Problem& p, const Vec& z_in,
                                           double tol_stat = 1e-8, double tol_psd = 1e-8) {
  Vec z = checked_sphere_point(p, z_in);
  StationaryCertificate cert;
  cert.grad_norm = riemannian_grad(p, z).norm;
  cert.lambda = multiplier(p, z);
  MinCurvature mc = tangent_min_curvature(p, z);
  cert.mu_min = mc.mu_min;
  Mat H = p.A;
  for (int k = 0; k < p.n; ++k) H(k, k) += Complex(2.0 * p.beta * std::norm(z(k)), 0.0);
  H.diagonal().array() -= Complex(2.0 * cert.lambda, 0.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::SolverFailure, "EigSolverFailure", "H eigendecomposition failed");
  cert.h_min_eig = es.eigenvalues()(0);
  if (cert.grad_norm > tol_stat) {
    cert.label = StationaryLabel::NotStationary;
    cert.global_ok = GlobalCert::NotApplicable;
    return cert;
  }
  cert.label = cert.mu_min > tol_psd    ? StationaryLabel::StrictLocalMin
               : cert.mu_min < -tol_psd ? StationaryLabel::Saddle
                                        : StationaryLabel::Degenerate;
  cert.global_ok =
      cert.h_min_eig >= -tol_psd ? GlobalCert::Certified : GlobalCert::Refuted;
  return cert;
}

enum class FourthOrderKind {
  NecessaryPass,
  NecessaryFail,
  SufficientPass,
  SufficientInconclusive,
  GlobalPass,
  GlobalFail
};

inline const char* fourth_order_kind_name(FourthOrderKind k) {
  switch (k) {
    case FourthOrderKind::NecessaryPass: return "necessary-pass";
    case FourthOrderKind::NecessaryFail: return "necessary-fail";
    case FourthOrderKind::SufficientPass: return "sufficient-pass";
    case FourthOrderKind::SufficientInconclusive: return "sufficient-inconclusive";
    case FourthOrderKind::GlobalPass: return "global-pass";
    case FourthOrderKind::GlobalFail: return "global-fail";
  }
  return "?";
}

struct FourthOrderWitness {
  Vec v;
  std::optional<Vec> w;
  double hf = 0.0, h3 = 0.0, h4 = 0.0, h3pair = 0.0;
  double violation = 0.0;  // amount by which the cited inequality is broken
  std::string condition;   // which inequality the witness violates
};

struct FourthOrderVerdict {
  FourthOrderKind kind;
  std::optional<FourthOrderWitness> witness;
  int null_dim = 0;
};

struct FourthOrderConfig {
  double eps_null = 1e-6;  // relative nullspace threshold
  int n_samples = 512;
  int polish_iters = 200;
  std::uint64_t seed = 0;
};

namespace detail {

struct TangentEigs {
  RealMat Q;    // m x (m−1) orthonormal tangent basis
  RealVec mu;   // ascending eigenvalues of Qᵀ M Q
  RealMat V;    // eigenvectors, coordinates w.r.t. Q
  double thresh = 0.0;
  int null_dim = 0;
};

inline TangentEigs tangent_eigs(const Problem& p, const Vec& z, double eps_null) {
  RealifiedTangentForm form = realified_tangent_form(p, z);
  TangentEigs te;
  te.Q = tangent_basis(form.normal);
  RealMat B = te.Q.transpose() * form.M * te.Q;
  Eigen::SelfAdjointEigenSolver<RealMat> es(0.5 * (B + B.transpose().eval()));
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::SolverFailure, "EigSolverFailure", "projected form eig failed");
  te.mu = es.eigenvalues();
  te.V = es.eigenvectors();
  double scale = std::max(1.0, te.mu.cwiseAbs().maxCoeff());
  te.thresh = eps_null * scale;
  for (int i = 0; i < te.mu.size(); ++i)
    if (std::abs(te.mu(i)) <= te.thresh) ++te.null_dim;
  return te;
}

inline void require_stationary(const Problem& p, const Vec& z) {
  if (riemannian_grad(p, z).norm > 1e-8)
    throw Error(ErrorKind::Precondition, "NotStationary",
                "fourth-order certificates require a stationary point");
}

// Derivative-free maximization of phi over the unit sphere in R^d:
// multistart hill climbing with a shrinking Gaussian step.
inline std::pair<double, RealVec> maximize_on_sphere(
    const std::function<double(const RealVec&)>& phi, int d, Rng rng, int n_starts,
    int iters) {
  auto polish = [&](RealVec c) {
    double best = phi(c);
    double sigma = 0.5;
    for (int it = 0; it < iters && sigma > 1e-10; ++it) {
      bool improved = false;
      for (int trial = 0; trial < 8; ++trial) {
        RealVec c2 = c;
        for (int i = 0; i < d; ++i) c2(i) += sigma * rng.normal();
        c2 /= c2.norm();
        double val = phi(c2);
        if (val > best) {
          best = val;
          c = c2;
          improved = true;
          break;
        }
      }
      if (!improved) sigma *= 0.5;
    }
    return std::make_pair(best, c);
  };
  double best = -std::numeric_limits<double>::infinity();
  RealVec arg = RealVec::Unit(d, 0);
  std::vector<RealVec> starts;
  for (int i = 0; i < d; ++i) {
    starts.push_back(RealVec::Unit(d, i));
    starts.push_back(-RealVec::Unit(d, i));
  }
  for (int s = 0; s < n_starts; ++s) {
    RealVec c(d);
    for (int i = 0; i < d; ++i) c(i) = rng.normal();
    if (c.norm() < 1e-12) c = RealVec::Unit(d, 0);
    starts.push_back(c / c.norm());
  }
  for (auto& c0 : starts) {
    auto [val, c] = polish(c0);
    if (val > best) {
      best = val;
      arg = c;
    }
  }
  return {best, arg};
}

inline bool dense_path_applies(const Problem& p) { return p.field == Field::Real && p.n <= 3; }

// Enumerates unit tangent directions for the dense real path (n ≤ 3):
// the whole tangent circle for n = 3, the ± pair for n = 2.
inline std::vector<Vec> dense_tangent_grid(const Problem& p, const TangentEigs& te,
                                           int resolution) {
  std::vector<Vec> dirs;
  int dim = static_cast<int>(te.Q.cols());
  if (dim == 1) {
    Vec v = te.Q.col(0).cast<Complex>();
    dirs.push_back(v);
    dirs.push_back(-v);
  } else {
    dirs.reserve(resolution);
    for (int i = 0; i < resolution; ++i) {
      double th = 2.0 * M_PI * i / resolution;
      RealVec x = std::cos(th) * te.Q.col(0) + std::sin(th) * te.Q.col(1);
      dirs.push_back(x.cast<Complex>());
    }
  }
  return dirs;
}

// The orthogonal complement of v inside the (real) tangent plane, for dim 2.
inline Vec dense_pair_direction(const TangentEigs& te, const Vec& v) {
  RealVec x = v.real();
  RealVec c = te.Q.transpose() * x;  // 2 coordinates
  RealVec w = -c(1) * te.Q.col(0) + c(0) * te.Q.col(1);
  return (w / w.norm()).cast<Complex>();
}

inline Vec null_combination(const Problem& p, const TangentEigs& te, const RealVec& c) {
  RealVec x = RealVec::Zero(te.Q.rows());
  for (int i = 0; i < te.null_dim; ++i) x += c(i) * (te.Q * te.V.col(i));
  return real_coords_to_field(p, x / x.norm());
}

// Random unit tangent direction in the strictly-positive curvature eigenspace,
// complex-orthogonalized against v (alternating projections).
inline std::optional<Vec> positive_space_direction(const Problem& p, const Vec& z,
                                                   const TangentEigs& te, const Vec& v,
                                                   Rng& rng) {
  int m1 = static_cast<int>(te.mu.size());
  int pos = m1 - te.null_dim;  // null eigenvalues come first (ascending, ≥ −thresh)
  if (pos <= 0) return std::nullopt;
  RealVec x = RealVec::Zero(te.Q.rows());
  for (int i = te.null_dim; i < m1; ++i)
    if (te.mu(i) > te.thresh) x += rng.normal() * (te.Q * te.V.col(i));
  if (x.norm() < 1e-12) return std::nullopt;
  Vec w = real_coords_to_field(p, x);
  for (int pass = 0; pass < 6; ++pass) {
    w -= v.dot(w) * v;              // v*w = 0 (complex)
    w = tangent_project(z, w);      // Re(z*w) = 0
    double nw = w.norm();
    if (nw < 1e-10) return std::nullopt;
    w /= nw;
  }
  if (std::abs(v.dot(w)) > 1e-8) return std::nullopt;
  return w;
}

}  // namespace detail

inline FourthOrderVerdict fourth_order_necessary(const Problem& p, const Vec& z_in,
                                                 const FourthOrderConfig& cfg = {}) {
  Vec z = checked_sphere_point(p, z_in);
  detail::require_stationary(p, z);
  detail::TangentEigs te = detail::tangent_eigs(p, z, cfg.eps_null);
  double margin = 1e-7 * (1.0 + p.beta);
  FourthOrderVerdict verdict;
  verdict.null_dim = te.null_dim;

  auto fail = [&](const Vec& v, const Vec* w, double violation, const char* cond) {
    FourthOrderWitness wit;
    wit.v = v;
    if (w) wit.w = *w;
    CurvatureReport c = curvature_forms(p, z, v, w);
    wit.hf = c.hf;
    wit.h3 = c.h3;
    wit.h4 = c.h4;
    wit.h3pair = c.h3pair.value_or(0.0);
    wit.violation = violation;
    wit.condition = cond;
    verdict.kind = FourthOrderKind::NecessaryFail;
    verdict.witness = wit;
  };

  // (i) H_f ⪰ 0 on the tangent space
  if (te.mu(0) < -std::max(te.thresh, margin)) {
    MinCurvature mc = tangent_min_curvature(p, z);
    fail(mc.v_min, nullptr, -mc.mu_min, "Hf >= 0");
    return verdict;
  }

  if (detail::dense_path_applies(p)) {
    auto dirs = detail::dense_tangent_grid(p, te, 10000);
    bool dim2 = te.Q.cols() == 2;
    for (const Vec& v : dirs) {
      CurvatureReport c = curvature_forms(p, z, v);
      if (c.hf > te.thresh) continue;  // not a null direction
      if (std::abs(c.h3) > margin) {
        fail(v, nullptr, std::abs(c.h3) - margin, "H3 = 0 on nullspace");
        return verdict;
      }
      if (c.h4 < -margin) {
        fail(v, nullptr, -c.h4 - margin, "H4 >= 0 on nullspace");
        return verdict;
      }
      if (dim2) {
        Vec w = detail::dense_pair_direction(te, v);
        CurvatureReport cw = curvature_forms(p, z, w);
        if (cw.hf > te.thresh) {
          double h3p = curvature_forms(p, z, v, &w).h3pair.value();
          double lhs = 4.0 * h3p * h3p, rhs = cw.hf * c.h4;
          if (lhs > rhs + margin) {
            fail(v, &w, lhs - rhs - margin, "4 H3(v,w)^2 <= Hf[w] H4(v)");
            return verdict;
          }
        }
      }
    }
    verdict.kind = FourthOrderKind::NecessaryPass;
    return verdict;
  }

  // sampling path
  if (te.null_dim > 0) {
    int d = te.null_dim;
    Rng rng(cfg.seed, 101);
    auto h3_abs = [&](const RealVec& c) {
      return std::abs(curvature_forms(p, z, detail::null_combination(p, te, c)).h3);
    };
    auto neg_h4 = [&](const RealVec& c) {
      return -curvature_forms(p, z, detail::null_combination(p, te, c)).h4;
    };
    int starts = std::max(4, cfg.n_samples / 16);
    auto [h3max, ch3] =
        detail::maximize_on_sphere(h3_abs, d, rng.stream(1), starts, cfg.polish_iters);
    if (h3max > margin) {
      fail(detail::null_combination(p, te, ch3), nullptr, h3max - margin,
           "H3 = 0 on nullspace");
      return verdict;
    }
    auto [negh4max, ch4] =
        detail::maximize_on_sphere(neg_h4, d, rng.stream(2), starts, cfg.polish_iters);
    if (negh4max > margin) {
      fail(detail::null_combination(p, te, ch4), nullptr, negh4max - margin,
           "H4 >= 0 on nullspace");
      return verdict;
    }
    Rng prng = rng.stream(3);
    for (int s = 0; s < cfg.n_samples; ++s) {
      RealVec c(d);
      for (int i = 0; i < d; ++i) c(i) = prng.normal();
      if (c.norm() < 1e-12) continue;
      c /= c.norm();
      Vec v = detail::null_combination(p, te, c);
      auto w = detail::positive_space_direction(p, z, te, v, prng);
      if (!w) continue;
      CurvatureReport cw = curvature_forms(p, z, *w);
      if (cw.hf <= te.thresh) continue;
      CurvatureReport cv = curvature_forms(p, z, v, &*w);
      double lhs = 4.0 * cv.h3pair.value() * cv.h3pair.value();
      double rhs = cw.hf * cv.h4;
      if (lhs > rhs + margin) {
        fail(v, &*w, lhs - rhs - margin, "4 H3(v,w)^2 <= Hf[w] H4(v)");
        return verdict;
      }
    }
  }
  verdict.kind = FourthOrderKind::NecessaryPass;
  return verdict;
}

inline FourthOrderVerdict fourth_order_sufficient(const Problem& p, const Vec& z_in,
                                                  const FourthOrderConfig& cfg = {}) {
  Vec z = checked_sphere_point(p, z_in);
  detail::require_stationary(p, z);
  FourthOrderVerdict nec = fourth_order_necessary(p, z, cfg);
  FourthOrderVerdict verdict;
  verdict.null_dim = nec.null_dim;
  verdict.witness = nec.witness;
  if (nec.kind == FourthOrderKind::NecessaryFail) {
    // sufficiency is inconclusive (we never claim non-minimality here)
    verdict.kind = FourthOrderKind::SufficientInconclusive;
    return verdict;
  }
  detail::TangentEigs te = detail::tangent_eigs(p, z, cfg.eps_null);
  double margin = 1e-7 * (1.0 + p.beta);
  if (te.null_dim == 0) {  // strict second-order minimum; conditions vacuous
    verdict.kind = FourthOrderKind::SufficientPass;
    return verdict;
  }

  auto inconclusive = [&](const Vec& v, const Vec& w, double violation, const char* cond) {
    FourthOrderWitness wit;
    wit.v = v;
    wit.w = w;
    CurvatureReport c = curvature_forms(p, z, v, &w);
    wit.hf = c.hf;
    wit.h3 = c.h3;
    wit.h4 = c.h4;
    wit.h3pair = c.h3pair.value_or(0.0);
    wit.violation = violation;
    wit.condition = cond;
    verdict.kind = FourthOrderKind::SufficientInconclusive;
    verdict.witness = wit;
  };

  // strictness check: 4H3(v,w)² < Hf[w]H4(v) unless H4(v) = 0 (then H3(v,w) = 0)
  auto check_pair = [&](const Vec& v, const Vec& w) -> bool {
    CurvatureReport cw = curvature_forms(p, z, w);
    if (cw.hf <= te.thresh) return true;
    CurvatureReport cv = curvature_forms(p, z, v, &w);
    double h3p = cv.h3pair.value();
    double lhs = 4.0 * h3p * h3p, rhs = cw.hf * cv.h4;
    if (cv.h4 > margin) {
      if (lhs >= rhs - margin) {
        inconclusive(v, w, lhs - (rhs - margin), "4 H3(v,w)^2 < Hf[w] H4(v) (strict)");
        return false;
      }
    } else if (lhs > margin) {
      inconclusive(v, w, lhs - margin, "H3(v,w) = 0 when H4(v) = 0");
      return false;
    }
    return true;
  };

  if (detail::dense_path_applies(p)) {
    if (te.Q.cols() == 2) {
      auto dirs = detail::dense_tangent_grid(p, te, 10000);
      for (const Vec& v : dirs) {
        if (curvature_forms(p, z, v).hf > te.thresh) continue;
        if (!check_pair(v, detail::dense_pair_direction(te, v))) return verdict;
      }
    }
    verdict.kind = FourthOrderKind::SufficientPass;
    return verdict;
  }

  Rng rng(cfg.seed, 202);
  int d = te.null_dim;
  for (int s = 0; s < cfg.n_samples; ++s) {
    RealVec c(d);
    for (int i = 0; i < d; ++i) c(i) = rng.normal();
    if (c.norm() < 1e-12) continue;
    c /= c.norm();
    Vec v = detail::null_combination(p, te, c);
    auto w = detail::positive_space_direction(p, z, te, v, rng);
    if (!w) continue;
    if (!check_pair(v, *w)) return verdict;
  }
  verdict.kind = FourthOrderKind::SufficientPass;
  return verdict;
}

inline FourthOrderVerdict global_fourth_order(const Problem& p, const Vec& z_in,
                                              const FourthOrderConfig& cfg = {}) {
  Vec z = checked_sphere_point(p, z_in);
  detail::require_stationary(p, z);
  detail::TangentEigs te = detail::tangent_eigs(p, z, cfg.eps_null);
  double margin = 1e-7 * (1.0 + p.beta);
  double fz = objective(p, z);
  FourthOrderVerdict verdict;
  verdict.null_dim = te.null_dim;

  auto fail = [&](const Vec& v, double violation, const char* cond) {
    FourthOrderWitness wit;
    wit.v = v;
    CurvatureReport c = curvature_forms(p, z, v);
    wit.hf = c.hf;
    wit.h3 = c.h3;
    wit.h4 = c.h4;
    wit.violation = violation;
    wit.condition = cond;
    verdict.kind = FourthOrderKind::GlobalFail;
    verdict.witness = wit;
  };

  // violation functionals of a unit tangent direction
  auto check_dir = [&](const Vec& v) -> bool {
    CurvatureReport c = curvature_forms(p, z, v);
    if (c.hf < -std::max(te.thresh, margin)) {
      fail(v, -c.hf, "Hf >= 0");
      return false;
    }
    double df = objective(p, v) - fz;
    double viol = 2.0 * c.h3 * c.h3 - c.hf * df;
    if (viol > margin) {
      fail(v, viol - margin, "2 H3(v)^2 <= Hf[v] (f(v) - f(z))");
      return false;
    }
    if (c.hf <= te.thresh) {
      if (std::abs(c.h3) > margin) {
        fail(v, std::abs(c.h3) - margin, "H3 = 0 on nullspace");
        return false;
      }
      if (c.h4 < -margin) {
        fail(v, -c.h4 - margin, "H4 >= 0 on nullspace");
        return false;
      }
    }
    return true;
  };

  if (detail::dense_path_applies(p)) {
    for (const Vec& v : detail::dense_tangent_grid(p, te, 10000))
      if (!check_dir(v)) return verdict;
    verdict.kind = FourthOrderKind::GlobalPass;
    return verdict;
  }

  Rng rng(cfg.seed, 303);
  int m1 = static_cast<int>(te.Q.cols());
  auto to_dir = [&](const RealVec& c) {
    RealVec x = te.Q * c;
    return real_coords_to_field(p, x / x.norm());
  };
  auto violation = [&](const RealVec& c) {
    Vec v = to_dir(c);
    CurvatureReport cr = curvature_forms(p, z, v);
    double df = objective(p, v) - fz;
    double worst = 2.0 * cr.h3 * cr.h3 - cr.hf * df;
    worst = std::max(worst, -cr.hf);
    return worst;
  };
  int starts = std::max(4, cfg.n_samples / 16);
  auto [worst, cworst] =
      detail::maximize_on_sphere(violation, m1, rng.stream(1), starts, cfg.polish_iters);
  if (worst > margin) {
    check_dir(to_dir(cworst));  // fills the witness with the precise condition
    if (verdict.witness) return verdict;
  }
  // nullspace conditions
  if (te.null_dim > 0) {
    int d = te.null_dim;
    auto h3_abs = [&](const RealVec& c) {
      return std::abs(curvature_forms(p, z, detail::null_combination(p, te, c)).h3);
    };
    auto neg_h4 = [&](const RealVec& c) {
      return -curvature_forms(p, z, detail::null_combination(p, te, c)).h4;
    };
    auto [h3max, ch3] =
        detail::maximize_on_sphere(h3_abs, d, rng.stream(2), starts, cfg.polish_iters);
    if (h3max > margin) {
      fail(detail::null_combination(p, te, ch3), h3max - margin, "H3 = 0 on nullspace");
      return verdict;
    }
    auto [negh4, ch4] =
        detail::maximize_on_sphere(neg_h4, d, rng.stream(3), starts, cfg.polish_iters);
    if (negh4 > margin) {
      fail(detail::null_combination(p, te, ch4), negh4 - margin, "H4 >= 0 on nullspace");
      return verdict;
    }
  }
  verdict.kind = FourthOrderKind::GlobalPass;
  return verdict;
}

// Randomized neighborhood oracle: true iff no sampled tangent step of length
// ≤ radius decreases f below f(z) − 1e-12.
inline bool brute_force_local_check(const Problem& p, const Vec& z_in, double radius = 1e-3,
                                    int samples = 20000, std::uint64_t seed = 0) {
  Vec z = checked_sphere_point(p, z_in);
  double f0 = objective(p, z);
  Rng rng(seed, 404);
  for (int s = 0; s < samples; ++s) {
    Vec u(p.n);
    for (int i = 0; i < p.n; ++i)
      u(i) = p.field == Field::Real ? Complex(rng.normal(), 0.0)
                                    : Complex(rng.normal(), rng.normal());
    Vec xi = tangent_project(z, u);
    double nrm = xi.norm();
    if (nrm < 1e-14) continue;
    xi *= radius * rng.uniform() / nrm;
    if (objective(p, retract(z, xi)) < f0 - 1e-12) return false;
  }
  return true;
}

}  // namespace qqs

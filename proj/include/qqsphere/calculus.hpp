#pragma once

#include <optional>

#include "qqsphere/core.hpp"

// Differential toolkit for f(z) = ½ z*Az + (β/2) Σ|z_k|^4 on the unit sphere.
// The multiplier is λ = ½ z*Az + β‖z‖₄⁴; a point is stationary when
// [A + 2β diag(|z|²)] z = 2λ z. H denotes A + 2β diag(|z|²) − 2λI.

namespace qqs {

namespace detail {

inline bool is_effectively_real(const Vec& z) {
  for (int i = 0; i < z.size(); ++i)
    if (z(i).imag() != 0.0) return false;
  return true;
}

}  // namespace detail

// Re-normalizes a point that is on the sphere within 1e-10, rejects otherwise.
inline Vec checked_sphere_point(const Problem& p, const Vec& z) {
  if (z.size() != p.n)
    throw Error(ErrorKind::Validation, "DimensionMismatch", "point length != n");
  if (p.field == Field::Real && !detail::is_effectively_real(z))
    throw Error(ErrorKind::Validation, "FieldMismatch", "complex point on a real problem");
  double nrm = z.norm();
  if (std::abs(nrm - 1.0) > 1e-10)
    throw Error(ErrorKind::Validation, "NotUnit", "point norm deviates from 1 beyond 1e-10");
  return z / nrm;
}

inline RealVec moduli_squared(const Vec& z) { return z.cwiseAbs2(); }

inline double quartic_norm4(const Vec& z) { return z.cwiseAbs2().squaredNorm(); }

inline double objective(const Problem& p, const Vec& z_in) {
  Vec z = checked_sphere_point(p, z_in);
  Complex q = z.dot(p.A * z);  // Eigen dot conjugates the left argument
  return 0.5 * q.real() + 0.5 * p.beta * quartic_norm4(z);
}

inline double multiplier(const Problem& p, const Vec& z_in) {
  Vec z = checked_sphere_point(p, z_in);
  Complex q = z.dot(p.A * z);
  return 0.5 * q.real() + p.beta * quartic_norm4(z);
}

struct GradResult {
  Vec g;        // tangent vector, Re(z*g) = 0
  double norm;  // field convention: real -> ‖g‖, complex -> ‖g‖/√2
};

inline GradResult riemannian_grad(const Problem& p, const Vec& y_in) {
  Vec y = checked_sphere_point(p, y_in);
  // ĝ = (A + 2β diag(|y|²)) y
  Vec ghat = p.A * y + 2.0 * p.beta * y.cwiseAbs2().cast<Complex>().cwiseProduct(y);
  double c = y.dot(ghat).real();
  GradResult r;
  r.g = ghat - c * y;
  double nrm = r.g.norm();
  r.norm = p.field == Field::Complex ? nrm / std::sqrt(2.0) : nrm;
  return r;
}

inline Vec tangent_project(const Vec& z, const Vec& u) {
  return u - Complex(z.dot(u).real() / z.squaredNorm(), 0.0) * z;
}

inline Vec retract(const Vec& z, const Vec& step) {
  Vec y = z + step;
  double nrm = y.norm();
  if (nrm <= 0.0) throw Error(ErrorKind::Validation, "ZeroVector", "retraction of -z");
  return y / nrm;
}

// Validates that v is a unit tangent direction at z (tolerance 1e-10) and
// returns the exactly projected, normalized copy used internally.
inline Vec checked_tangent_unit(const Vec& z, const Vec& v) {
  if (v.size() != z.size())
    throw Error(ErrorKind::Validation, "DimensionMismatch", "direction length mismatch");
  if (std::abs(v.norm() - 1.0) > 1e-10)
    throw Error(ErrorKind::Validation, "NotUnit", "direction norm deviates from 1");
  if (std::abs(z.dot(v).real()) > 1e-10)
    throw Error(ErrorKind::Validation, "NotTangent", "Re(z*v) deviates from 0");
  Vec w = tangent_project(z, v);
  return w / w.norm();
}

inline Vec geodesic(const Vec& z, const Vec& v_in, double t) {
  Vec v = checked_tangent_unit(z, v_in);
  return std::cos(t) * z + std::sin(t) * v;
}

struct CurvatureReport {
  double hf = 0.0;
  double h3 = 0.0;
  double h4 = 0.0;
  std::optional<double> h3pair;
};

inline CurvatureReport curvature_forms(const Problem& p, const Vec& z_in, const Vec& v_in,
                                       const Vec* w_in = nullptr) {
  Vec z = checked_sphere_point(p, z_in);
  Vec v = checked_tangent_unit(z, v_in);
  double lam = multiplier(p, z);
  CurvatureReport r;
  Complex quad = v.dot(p.A * v);
  double hf = quad.real() - 2.0 * lam;
  double h3 = 0.0, h4 = 0.0;
  for (int k = 0; k < p.n; ++k) {
    double zv = (std::conj(z(k)) * v(k)).real();
    double dv = std::norm(v(k)) - std::norm(z(k));
    hf += 2.0 * p.beta * std::norm(z(k)) * std::norm(v(k)) + 4.0 * p.beta * zv * zv;
    h3 += p.beta * dv * zv;
    h4 += p.beta * (dv * dv - 4.0 * zv * zv);
  }
  r.hf = hf;
  r.h3 = h3;
  r.h4 = h4;
  if (w_in) {
    Vec w = checked_tangent_unit(z, *w_in);
    double extra = 0.0;
    for (int k = 0; k < p.n; ++k)
      extra += (std::conj(v(k)) * w(k)).real() * (std::conj(v(k)) * z(k)).real();
    r.h3pair = h3 + 2.0 * p.beta * extra;
  }
  return r;
}

struct GPoly {
  double a2 = 0.0;  // H_f(z)[v]
  double a1 = 0.0;  // 4 H₃(v)
  double a0 = 0.0;  // 2 [f(v) − f(z)]
};

// Quadratic G(v,t) = a₂t² + a₁t + a₀ with
// G(v, cot θ) = 2 [f(cos θ z + sin θ v) − f(z)] / sin⁴θ at stationary z.
inline GPoly g_poly(const Problem& p, const Vec& z_in, const Vec& v_in) {
  Vec z = checked_sphere_point(p, z_in);
  if (riemannian_grad(p, z).norm > 1e-8)
    throw Error(ErrorKind::Precondition, "NotStationary", "g_poly requires a stationary point");
  Vec v = checked_tangent_unit(z, v_in);
  CurvatureReport c = curvature_forms(p, z, v);
  GPoly g;
  g.a2 = c.hf;
  g.a1 = 4.0 * c.h3;
  g.a0 = 2.0 * (objective(p, v) - objective(p, z));
  return g;
}

struct RealifiedTangentForm {
  RealMat M;        // size n (real field) or 2n (complex field)
  RealVec normal;   // real coordinates of z; tangent space = normal ⊥
};

// Real quadratic form x ↦ H_f(z)[v] with x the real coordinates of v.
// Real field: M = A + 6β diag(z²) − 2λI. Complex field: realify
// K = A + 2β diag(|z|²) − 2λI as [[Re K, −Im K],[Im K, Re K]] and add the
// rank-n correction 4β Σ w_k w_kᵀ, where w_kᵀx = Re(v_k conj(z_k)).
inline RealifiedTangentForm realified_tangent_form(const Problem& p, const Vec& z_in) {
  Vec z = checked_sphere_point(p, z_in);
  double lam = multiplier(p, z);
  RealifiedTangentForm out;
  if (p.field == Field::Real) {
    RealVec zr = z.real();
    RealMat M = p.A.real();
    for (int k = 0; k < p.n; ++k) M(k, k) += 6.0 * p.beta * zr(k) * zr(k);
    M.diagonal().array() -= 2.0 * lam;
    out.M = 0.5 * (M + M.transpose().eval());
    out.normal = zr;
    return out;
  }
  Mat K = p.A;
  for (int k = 0; k < p.n; ++k) K(k, k) += 2.0 * p.beta * std::norm(z(k));
  K.diagonal().array() -= Complex(2.0 * lam, 0.0);
  RealMat M(2 * p.n, 2 * p.n);
  M.topLeftCorner(p.n, p.n) = K.real();
  M.bottomRightCorner(p.n, p.n) = K.real();
  M.topRightCorner(p.n, p.n) = -K.imag();
  M.bottomLeftCorner(p.n, p.n) = K.imag();
  for (int k = 0; k < p.n; ++k) {
    // w_k has Re z_k at slot k and Im z_k at slot n+k
    double a = z(k).real(), b = z(k).imag();
    M(k, k) += 4.0 * p.beta * a * a;
    M(k, p.n + k) += 4.0 * p.beta * a * b;
    M(p.n + k, k) += 4.0 * p.beta * a * b;
    M(p.n + k, p.n + k) += 4.0 * p.beta * b * b;
  }
  out.M = 0.5 * (M + M.transpose().eval());
  out.normal.resize(2 * p.n);
  out.normal << z.real(), z.imag();
  return out;
}

// Orthonormal basis of the hyperplane normalᵀ x = 0 (columns of the returned
// m x (m−1) matrix), from a Householder QR of the normal vector.
inline RealMat tangent_basis(const RealVec& normal) {
  int m = static_cast<int>(normal.size());
  Eigen::HouseholderQR<RealMat> qr(normal);
  RealMat Q = qr.householderQ();
  // first column is ±normal; the rest span its complement
  return Q.rightCols(m - 1);
}

inline Vec real_coords_to_field(const Problem& p, const RealVec& x) {
  if (p.field == Field::Real) return x.cast<Complex>();
  Vec v(p.n);
  for (int k = 0; k < p.n; ++k) v(k) = Complex(x(k), x(p.n + k));
  return v;
}

inline RealVec field_to_real_coords(const Problem& p, const Vec& v) {
  if (p.field == Field::Real) return v.real();
  RealVec x(2 * p.n);
  x << v.real(), v.imag();
  return x;
}

struct MinCurvature {
  double mu_min = 0.0;
  Vec v_min;  // unit tangent direction attaining it
};

// Exact min of H_f(z)[v] over unit tangent v: smallest eigenvalue of the
// realified form restricted to the tangent hyperplane.
inline MinCurvature tangent_min_curvature(const Problem& p, const Vec& z_in) {
  RealifiedTangentForm form = realified_tangent_form(p, z_in);
  RealMat Q = tangent_basis(form.normal);
  RealMat B = Q.transpose() * form.M * Q;
  Eigen::SelfAdjointEigenSolver<RealMat> es(0.5 * (B + B.transpose().eval()));
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::SolverFailure, "EigSolverFailure", "projected curvature eig failed");
  MinCurvature out;
  out.mu_min = es.eigenvalues()(0);
  RealVec x = Q * es.eigenvectors().col(0);
  out.v_min = real_coords_to_field(p, x / x.norm());
  return out;
}

// ‖ |y|² − |z|² ‖₂ — metric on equivalence classes of componentwise moduli.
inline double equivalence_distance(const Vec& y, const Vec& z) {
  return (y.cwiseAbs2() - z.cwiseAbs2()).norm();
}

}  // namespace qqs

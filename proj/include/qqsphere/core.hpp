#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

#include "qqsphere/rng.hpp"

namespace qqs {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;
using RealMat = Eigen::MatrixXd;

// Error taxonomy shared by the whole library. The kind maps onto the CLI's
// exit-code contract: Validation -> 2, SolverFailure -> 3, Precondition -> 4.
enum class ErrorKind { Validation, SolverFailure, Precondition };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }
  int exit_code() const {
    switch (kind_) {
      case ErrorKind::Validation: return 2;
      case ErrorKind::SolverFailure: return 3;
      case ErrorKind::Precondition: return 4;
    }
    return 3;
  }

 private:
  ErrorKind kind_;
  std::string code_;
};

enum class Field { Real, Complex };

inline const char* field_name(Field f) { return f == Field::Real ? "real" : "complex"; }

// min ½ z*Az + (β/2) Σ|z_k|^4  s.t. ‖z‖ = 1, z in the given field.
struct Problem {
  int n = 0;
  double beta = 0.0;
  Field field = Field::Real;
  Mat A;
};

inline void validate_problem(const Problem& p) {
  if (p.n < 1) throw Error(ErrorKind::Validation, "DimensionMismatch", "n must be >= 1");
  if (!(p.beta > 0.0))
    throw Error(ErrorKind::Validation, "NonPositiveBeta", "beta must be > 0");
  if (p.A.rows() != p.n || p.A.cols() != p.n)
    throw Error(ErrorKind::Validation, "DimensionMismatch", "A is not n x n");
  double scale = p.A.cwiseAbs().maxCoeff();
  double asym = (p.A - p.A.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, scale))
    throw Error(ErrorKind::Validation, "NonHermitian", "A deviates from A* beyond tolerance");
  if (p.field == Field::Real && p.A.imag().cwiseAbs().maxCoeff() != 0.0)
    throw Error(ErrorKind::Validation, "FieldMismatch", "real problem with complex entries");
}

// Eigendecomposition A = P diag(lambda) P*, eigenvalues ascending.
// rho = spectral diameter, delta = gap above the smallest eigenvalue.
struct Spectrum {
  RealVec eigenvalues;
  Mat eigenvectors;
  double rho = 0.0;
  double delta = 0.0;
};

inline Spectrum spectrum(const Problem& p) {
  Eigen::SelfAdjointEigenSolver<Mat> es(p.A);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::SolverFailure, "EigSolverFailure", "Hermitian eigensolver did not converge");
  Spectrum s;
  s.eigenvalues = es.eigenvalues();
  s.eigenvectors = es.eigenvectors();
  // Fix the per-column phase so that repeated runs (and different LAPACK-free
  // paths) agree: rotate the largest-magnitude entry to the positive real axis.
  for (int j = 0; j < p.n; ++j) {
    int imax = 0;
    double best = -1.0;
    for (int i = 0; i < p.n; ++i) {
      double m = std::abs(s.eigenvectors(i, j));
      if (m > best) { best = m; imax = i; }
    }
    Complex pivot = s.eigenvectors(imax, j);
    if (std::abs(pivot) > 0) s.eigenvectors.col(j) *= std::conj(pivot) / std::abs(pivot);
  }
  s.rho = s.eigenvalues(p.n - 1) - s.eigenvalues(0);
  s.delta = p.n >= 2 ? s.eigenvalues(1) - s.eigenvalues(0) : 0.0;
  return s;
}

enum class ProblemKind { DiagonalUniform, RankOne, DenseSymmetric, DenseHermitian, Figure1 };

inline ProblemKind parse_kind(const std::string& s) {
  if (s == "diagonal-uniform" || s == "DiagonalUniform") return ProblemKind::DiagonalUniform;
  if (s == "rank-one" || s == "RankOne") return ProblemKind::RankOne;
  if (s == "dense-symmetric" || s == "DenseSymmetric") return ProblemKind::DenseSymmetric;
  if (s == "dense-hermitian" || s == "DenseHermitian") return ProblemKind::DenseHermitian;
  if (s == "figure1" || s == "Figure1") return ProblemKind::Figure1;
  throw Error(ErrorKind::Validation, "BadKind", "unknown problem kind: " + s);
}

namespace detail {

// Shift A by -lambda_min * I so the smallest eigenvalue becomes 0. All
// certificates are invariant under this; only f / lambda pick up the shift.
inline void shift_to_psd(Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::SolverFailure, "EigSolverFailure", "shift normalization failed");
  double lmin = es.eigenvalues()(0);
  A.diagonal().array() -= Complex(lmin, 0.0);
}

}  // namespace detail

inline Problem generate_problem(ProblemKind kind, int n, double beta, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::Validation, "DimensionMismatch", "n must be >= 1");
  if (!(beta > 0.0)) throw Error(ErrorKind::Validation, "NonPositiveBeta", "beta must be > 0");
  Problem p;
  p.n = n;
  p.beta = beta;
  Rng rng(seed, static_cast<std::uint64_t>(kind));
  switch (kind) {
    case ProblemKind::Figure1: {
      if (n != 3)
        throw Error(ErrorKind::Validation, "BadKindDimension", "figure1 requires n=3");
      p.field = Field::Real;
      p.A = Mat::Zero(3, 3);
      p.A(0, 0) = p.A(1, 1) = p.A(2, 2) = 1.0;
      p.A(0, 2) = p.A(2, 0) = 1.0;
      break;
    }
    case ProblemKind::DiagonalUniform: {
      p.field = Field::Real;
      p.A = Mat::Zero(n, n);
      double lo = 1.0;
      for (int i = 0; i < n; ++i) {
        double d = rng.uniform();
        p.A(i, i) = d;
        lo = std::min(lo, d);
      }
      p.A.diagonal().array() -= Complex(lo, 0.0);
      break;
    }
    case ProblemKind::RankOne: {
      p.field = Field::Complex;
      Vec a(n);
      for (int i = 0; i < n; ++i) a(i) = Complex(rng.normal(), rng.normal()) / std::sqrt(2.0);
      p.A = a * a.adjoint();
      p.A = Complex(0.5, 0.0) * (p.A + p.A.adjoint().eval());
      if (n == 1) p.A(0, 0) = 0.0;  // 1x1 rank-one shifts to zero
      break;
    }
    case ProblemKind::DenseSymmetric: {
      p.field = Field::Real;
      RealMat B(n, n);
      double off = 1.0 / std::sqrt(static_cast<double>(n));
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double v = rng.normal() * (i == j ? std::sqrt(2.0 / n) : off);
          B(i, j) = v;
          B(j, i) = v;
        }
      p.A = B.cast<Complex>();
      detail::shift_to_psd(p.A);
      p.A.imag().setZero();
      break;
    }
    case ProblemKind::DenseHermitian: {
      p.field = Field::Complex;
      Mat B(n, n);
      double off = 1.0 / std::sqrt(2.0 * n);
      for (int i = 0; i < n; ++i) {
        B(i, i) = rng.normal() * std::sqrt(1.0 / n);
        for (int j = i + 1; j < n; ++j) {
          B(i, j) = Complex(rng.normal() * off, rng.normal() * off);
          B(j, i) = std::conj(B(i, j));
        }
      }
      p.A = B;
      detail::shift_to_psd(p.A);
      break;
    }
  }
  validate_problem(p);
  return p;
}

// Formats a double with 17 significant digits (round-trip exact).
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace qqs

#pragma once

#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "qqsphere/core.hpp"

// File formats:
//   problem: {"n": int, "beta": float, "field": "real"|"complex",
//             "A": {"re": [[...]], "im": [[...]]}}   ("im" optional for real)
//   point:   {"re": [...], "im": [...]}              ("im" optional)
// Output always carries 17 significant digits so parse(serialize(x)) == x.

namespace qqs {

inline Problem parse_problem(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Validation, "MalformedDocument", e.what());
  }
  Problem p;
  try {
    p.n = doc.at("n").get<int>();
    p.beta = doc.at("beta").get<double>();
    std::string field = doc.at("field").get<std::string>();
    if (field == "real")
      p.field = Field::Real;
    else if (field == "complex")
      p.field = Field::Complex;
    else
      throw Error(ErrorKind::Validation, "MalformedDocument", "field must be real|complex");
    const auto& a = doc.at("A");
    const auto& re = a.at("re");
    if (p.n < 1) throw Error(ErrorKind::Validation, "DimensionMismatch", "n must be >= 1");
    if (static_cast<int>(re.size()) != p.n)
      throw Error(ErrorKind::Validation, "DimensionMismatch", "A.re row count != n");
    p.A = Mat::Zero(p.n, p.n);
    for (int i = 0; i < p.n; ++i) {
      if (static_cast<int>(re[i].size()) != p.n)
        throw Error(ErrorKind::Validation, "DimensionMismatch", "A.re row length != n");
      for (int j = 0; j < p.n; ++j) p.A(i, j) = re[i][j].get<double>();
    }
    if (a.contains("im")) {
      const auto& im = a.at("im");
      if (static_cast<int>(im.size()) != p.n)
        throw Error(ErrorKind::Validation, "DimensionMismatch", "A.im row count != n");
      for (int i = 0; i < p.n; ++i) {
        if (static_cast<int>(im[i].size()) != p.n)
          throw Error(ErrorKind::Validation, "DimensionMismatch", "A.im row length != n");
        for (int j = 0; j < p.n; ++j) p.A(i, j) += Complex(0.0, im[i][j].get<double>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Validation, "MalformedDocument", e.what());
  }
  if (!(p.beta > 0.0))
    throw Error(ErrorKind::Validation, "NonPositiveBeta", "beta must be > 0");
  if (p.field == Field::Real && p.A.imag().cwiseAbs().maxCoeff() != 0.0)
    throw Error(ErrorKind::Validation, "FieldMismatch", "real problem with nonzero im block");
  // Hermitian check before symmetrizing; then average to kill rounding noise.
  double scale = std::max(1.0, p.A.cwiseAbs().maxCoeff());
  if ((p.A - p.A.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw Error(ErrorKind::Validation, "NonHermitian", "A deviates from A* beyond 1e-9");
  p.A = Complex(0.5, 0.0) * (p.A + p.A.adjoint().eval());
  validate_problem(p);
  return p;
}

inline std::string serialize_problem(const Problem& p) {
  std::ostringstream os;
  os << "{\"n\": " << p.n << ", \"beta\": " << fmt17(p.beta) << ", \"field\": \""
     << field_name(p.field) << "\", \"A\": {\"re\": [";
  for (int i = 0; i < p.n; ++i) {
    os << (i ? ", [" : "[");
    for (int j = 0; j < p.n; ++j) os << (j ? ", " : "") << fmt17(p.A(i, j).real());
    os << "]";
  }
  os << "]";
  if (p.field == Field::Complex) {
    os << ", \"im\": [";
    for (int i = 0; i < p.n; ++i) {
      os << (i ? ", [" : "[");
      for (int j = 0; j < p.n; ++j) os << (j ? ", " : "") << fmt17(p.A(i, j).imag());
      os << "]";
    }
    os << "]";
  }
  os << "}}\n";
  return os.str();
}

inline Vec parse_point(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Validation, "MalformedDocument", e.what());
  }
  try {
    // Accept either the {"re":…, "im":…} object or a bare array of reals.
    if (doc.is_array()) {
      Vec v(doc.size());
      for (std::size_t i = 0; i < doc.size(); ++i) v(i) = doc[i].get<double>();
      return v;
    }
    const auto& re = doc.at("re");
    Vec v(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) v(i) = re[i].get<double>();
    if (doc.contains("im")) {
      const auto& im = doc.at("im");
      if (im.size() != re.size())
        throw Error(ErrorKind::Validation, "DimensionMismatch", "re/im length mismatch");
      for (std::size_t i = 0; i < im.size(); ++i) v(i) += Complex(0.0, im[i].get<double>());
    }
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Validation, "MalformedDocument", e.what());
  }
}

inline std::string serialize_point(const Vec& v, bool with_imag) {
  std::ostringstream os;
  os << "{\"re\": [";
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << fmt17(v(i).real());
  os << "]";
  if (with_imag) {
    os << ", \"im\": [";
    for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << fmt17(v(i).imag());
    os << "]";
  }
  os << "}\n";
  return os.str();
}

}  // namespace qqs

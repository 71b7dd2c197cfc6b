/**
 * @file verdict.hpp
 * @brief Transient-center verdicts and their certificates.
 */
#pragma once

#include <map>
#include <string>

namespace tscope {

enum class Decision { Center, NotCenter, Inconclusive };

enum class Criterion {
  None,
  StableExclusion,
  LinearEigenspace,
  GradientEigvecLinear,
  GradientEigvecH1,
  GradientEigvecH2,
  PerronFrobenius,
  HessianFlatness,
  Empirical,
};

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::Center: return "Center";
    case Decision::NotCenter: return "NotCenter";
    case Decision::Inconclusive: return "Inconclusive";
  }
  return "?";
}

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::None: return "None";
    case Criterion::StableExclusion: return "StableExclusion";
    case Criterion::LinearEigenspace: return "LinearEigenspace";
    case Criterion::GradientEigvecLinear: return "GradientEigvecLinear";
    case Criterion::GradientEigvecH1: return "GradientEigvecH1";
    case Criterion::GradientEigvecH2: return "GradientEigvecH2";
    case Criterion::PerronFrobenius: return "PerronFrobenius";
    case Criterion::HessianFlatness: return "HessianFlatness";
    case Criterion::Empirical: return "Empirical";
  }
  return "?";
}

/// Per-criterion decision with a numeric certificate. A Center decision means
/// the cited criterion's hypotheses all held with positive recorded margins;
/// NotCenter only ever comes from StableExclusion. `applicable` is false when
/// the criterion's structural preconditions were not met at all. Verdicts from
/// the sampling-based search carry empirical = true: they are evidence, not
/// proof.
struct CenterVerdict {
  Decision decision = Decision::Inconclusive;
  Criterion criterion = Criterion::None;
  std::map<std::string, double> certificate;
  bool applicable = true;
  bool empirical = false;
  std::string note;
};

inline CenterVerdict not_applicable(Criterion c, const std::string& why) {
  CenterVerdict v;
  v.criterion = c;
  v.applicable = false;
  v.note = why;
  return v;
}

}  // namespace tscope

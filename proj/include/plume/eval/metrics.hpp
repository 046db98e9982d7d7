#pragma once

#include "plume/estimate/estimators.hpp"
#include "plume/sim/plume.hpp"

#include <span>
#include <string>

namespace plume::eval {

enum class Objective { BgMse, IdConfidence };
std::string to_string(Objective o);

/// Mean over ROI pixels and bands of the squared error against L_off_true.
/// Throws DomainError when the estimate covers pixels outside the truth.
double background_mse(const bg::BackgroundEstimate& estimate, const sim::PlumeTruth& truth);

/// global/method for MSE, method/global for confidence; > 1 means the
/// method beats Global. Throws DomainError on a zero denominator.
double improvement_ratio(double global_value, double method_value, Objective objective);

struct SignTest {
  int wins = 0;
  int losses = 0;
  int ties = 0;
  double p_value = 1.0;  ///< two-sided exact binomial, ties dropped
};
/// Paired comparison of a[i] against b[i]; a win is a[i] > b[i].
SignTest sign_test(std::span<const double> a, std::span<const double> b);

}  // namespace plume::eval

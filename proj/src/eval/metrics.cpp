#include "plume/eval/metrics.hpp"

#include "plume/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace plume::eval {

std::string to_string(Objective o) { return o == Objective::BgMse ? "bg_mse" : "id_confidence"; }

double background_mse(const bg::BackgroundEstimate& estimate, const sim::PlumeTruth& truth) {
  const RadianceCube& ref = truth.l_off_true;
  if (estimate.roi_pixels.empty()) throw DomainError("estimate covers no pixels");
  if (estimate.backgrounds.rows() != static_cast<Eigen::Index>(estimate.roi_pixels.size()) ||
      estimate.backgrounds.cols() != ref.bands()) {
    throw DomainError("estimate shape does not match the truth");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < estimate.roi_pixels.size(); ++i) {
    const int p = estimate.roi_pixels[i];
    if (p < 0 || p >= ref.pixel_count()) throw DomainError("estimate pixel outside the truth image");
    sum += (estimate.backgrounds.row(static_cast<Eigen::Index>(i)).transpose() - ref.spectrum(p)).squaredNorm();
  }
  return sum / (static_cast<double>(estimate.roi_pixels.size()) * ref.bands());
}

double improvement_ratio(double global_value, double method_value, Objective objective) {
  const double denom = objective == Objective::BgMse ? method_value : global_value;
  if (denom == 0.0) throw DomainError("improvement ratio with a zero denominator");
  return objective == Objective::BgMse ? global_value / method_value : method_value / global_value;
}

SignTest sign_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("sign test needs paired samples");
  SignTest t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) {
      ++t.wins;
    } else if (a[i] < b[i]) {
      ++t.losses;
    } else {
      ++t.ties;
    }
  }
  const int n = t.wins + t.losses;
  if (n == 0) return t;
  // P(X >= max(w, l)) for X ~ Binomial(n, 1/2), doubled.
  const int k = std::max(t.wins, t.losses);
  double tail = 0.0;
  for (int i = k; i <= n; ++i) {
    tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
  }
  t.p_value = std::min(1.0, 2.0 * tail);
  return t;
}

}  // namespace plume::eval

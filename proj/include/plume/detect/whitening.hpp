#pragma once

#include "plume/core/types.hpp"

#include <Eigen/Core>

namespace plume::detect {

/// Global background statistics and the symmetric inverse square root of the
/// regularized covariance.
class WhiteningModel {
 public:
  /// Sample mean/covariance over all pixels not in `exclude`. The ridge is
  /// 1e-6 * trace(cov) / B, floored at kMinRegularization.
  /// Throws DomainError when fewer than B + 1 pixels are included.
  static WhiteningModel fit(const RadianceCube& cube, const PixelMask* exclude = nullptr);

  /// Build from given statistics. Eigenvalues of (sigma + eps I) are clamped at eps.
  static WhiteningModel from_covariance(Spectrum mu, Eigen::MatrixXd sigma, double reg_epsilon);

  static constexpr double kMinRegularization = 1e-12;

  const Spectrum& mean() const noexcept { return mu_; }
  const Eigen::MatrixXd& covariance() const noexcept { return sigma_; }
  const Eigen::MatrixXd& inv_sqrt() const noexcept { return inv_sqrt_; }
  double reg_epsilon() const noexcept { return reg_epsilon_; }
  int bands() const noexcept { return static_cast<int>(mu_.size()); }

  /// inv_sqrt * (spectrum - background).
  Spectrum whiten(const Eigen::Ref<const Spectrum>& spectrum, const Eigen::Ref<const Spectrum>& background) const;
  /// Centered on the global mean.
  Spectrum whiten(const Eigen::Ref<const Spectrum>& spectrum) const { return whiten(spectrum, mu_); }
  /// inv_sqrt * target, no centering (library signatures).
  Spectrum whiten_target(const Eigen::Ref<const Spectrum>& target) const { return inv_sqrt_ * target; }

 private:
  Spectrum mu_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd inv_sqrt_;
  double reg_epsilon_ = 0.0;
};

}  // namespace plume::detect

#include "plume/detect/whitening.hpp"

#include "plume/core/error.hpp"
#include "plume/kernels/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <string>

namespace plume::detect {

WhiteningModel WhiteningModel::fit(const RadianceCube& cube, const PixelMask* exclude) {
  std::vector<int> rows;
  if (exclude != nullptr) {
    if (exclude->height() != cube.height() || exclude->width() != cube.width()) {
      throw DomainError("exclusion mask does not match cube");
    }
    rows = (~*exclude).indices();
  } else {
    rows.resize(static_cast<std::size_t>(cube.pixel_count()));
    std::iota(rows.begin(), rows.end(), 0);
  }
  if (static_cast<int>(rows.size()) < cube.bands() + 1) {
    throw DomainError("rank-deficient background: " + std::to_string(rows.size()) + " pixels for " +
                      std::to_string(cube.bands()) + " bands");
  }
  kernels::Moments m = kernels::moments(cube.pixels(), rows);
  const double eps = std::max(1e-6 * m.covariance.trace() / cube.bands(), kMinRegularization);
  return from_covariance(std::move(m.mean), std::move(m.covariance), eps);
}

WhiteningModel WhiteningModel::from_covariance(Spectrum mu, Eigen::MatrixXd sigma, double reg_epsilon) {
  if (sigma.rows() != mu.size() || sigma.cols() != mu.size()) throw DomainError("covariance shape mismatch");
  if (reg_epsilon < 0.0) throw DomainError("regularization must be non-negative");
  WhiteningModel w;
  w.mu_ = std::move(mu);
  w.sigma_ = std::move(sigma);
  w.reg_epsilon_ = reg_epsilon;

  Eigen::MatrixXd regularized = w.sigma_;
  regularized.diagonal().array() += reg_epsilon;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(regularized);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  Eigen::VectorXd values = eig.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = std::max(values[i], reg_epsilon);
    if (!(v > 0.0)) throw NumericalError("singular covariance with zero regularization");
    values[i] = 1.0 / std::sqrt(v);
  }
  const Eigen::MatrixXd& vecs = eig.eigenvectors();
  w.inv_sqrt_ = vecs * values.asDiagonal() * vecs.transpose();
  w.inv_sqrt_ = 0.5 * (w.inv_sqrt_ + w.inv_sqrt_.transpose()).eval();
  return w;
}

Spectrum WhiteningModel::whiten(const Eigen::Ref<const Spectrum>& spectrum,
                                const Eigen::Ref<const Spectrum>& background) const {
  if (spectrum.size() != mu_.size() || background.size() != mu_.size()) {
    throw DomainError("spectrum length does not match whitening model");
  }
  return inv_sqrt_ * (spectrum - background);
}

}  // namespace plume::detect

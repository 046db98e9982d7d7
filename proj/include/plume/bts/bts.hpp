#pragma once

// Background-target separation: fit one background L_off to a clean pixel
// set and, jointly, per-pixel strengths psi_i and a shared target shape t to
// the contaminated set, under
//   f = 1/n sum ||L_i - L_off||^2 + 1/m sum ||Lbar_i - (L_off + psi_i o t)||^2
// with psi_i >= 0 (emission) or <= 0 (absorption) and 0 <= t <= 1.

#include "plume/core/error.hpp"
#include "plume/core/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace plume::bts {

struct BtsProblem {
  RowMatrix clean;         ///< n x B, n >= 1
  RowMatrix contaminated;  ///< m x B, m may be 0
  SignMode sign_mode = SignMode::Absorption;

  int bands() const { return static_cast<int>(clean.cols()); }
  /// Throws DomainError for an empty clean set, mismatched bands or non-finite data.
  void validate() const;
};

struct BtsPoint {
  Spectrum l_off;
  RowMatrix psi;  ///< m x B
  Spectrum t;
};

struct BtsObjective {
  double value = 0.0;
  BtsPoint gradient;
};

BtsObjective bts_objective(const BtsPoint& point, const BtsProblem& problem);

/// L_off = clean mean; t = sign-appropriate part of the mean residual scaled
/// to max 1 (all ones if that part vanishes); psi_i = clipped projection
/// coefficient of residual i on t, repeated across bands.
BtsPoint initial_point(const BtsProblem& problem);

struct BtsOptions {
  int max_iter = 500;
  double tol = 1e-8;
  /// Kept for interface stability; the initialization is deterministic.
  std::uint64_t seed = 0;
};

struct BtsSolution {
  Spectrum l_off;
  RowMatrix psi;
  Spectrum t;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;
};

/// Raised when the objective turns non-finite; carries the last feasible iterate.
class BtsNumericalError : public NumericalError {
 public:
  BtsNumericalError(const std::string& what, BtsSolution last) : NumericalError(what), last_(std::move(last)) {}
  const BtsSolution& last_feasible() const noexcept { return last_; }

 private:
  BtsSolution last_;
};

BtsSolution solve_bts(const BtsProblem& problem, const BtsOptions& options = {});

/// Objective per accepted iteration as CSV (iteration,objective).
void write_trace_csv(const BtsSolution& solution, const std::filesystem::path& path);

}  // namespace plume::bts

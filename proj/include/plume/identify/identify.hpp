#pragma once

#include "plume/core/types.hpp"
#include "plume/detect/whitening.hpp"
#include "plume/estimate/estimators.hpp"
#include "plume/sim/gas.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace plume::identify {

inline constexpr const char* kNoneEntry = "None";

struct LibraryEntry {
  std::string name;
  Spectrum absorption;
};

/// Reference signatures plus the rejection entry "None" (zero absorption).
class SpectralLibrary {
 public:
  /// Throws DomainError on duplicate names, mismatched lengths, fewer than
  /// two entries or a missing "None" entry.
  explicit SpectralLibrary(std::vector<LibraryEntry> entries);
  /// The given gases plus "None".
  static SpectralLibrary from_gases(const std::vector<sim::GasSpec>& gases);

  const std::vector<LibraryEntry>& entries() const noexcept { return entries_; }
  int size() const noexcept { return static_cast<int>(entries_.size()); }
  int bands() const { return static_cast<int>(entries_.front().absorption.size()); }
  int index_of(const std::string& name) const;

  /// inv_sqrt * absorption per entry.
  std::vector<Spectrum> whitened_refs(const detect::WhiteningModel& model) const;

 private:
  std::vector<LibraryEntry> entries_;
};

/// CSV: header `name,b0,...`, one entry per row.
void write_library(const SpectralLibrary& lib, const std::filesystem::path& path);
SpectralLibrary read_library(const std::filesystem::path& path);

/// Mean over ROI pixels of inv_sqrt (L_i - background_i).
Spectrum whitened_superpixel(const detect::WhiteningModel& model, const RadianceCube& cube,
                             const bg::BackgroundEstimate& estimate);

/// Subtract the across-band mean and divide by the population standard
/// deviation, floored at 1e-12 (a constant input maps to zeros).
Spectrum standardize(const Eigen::Ref<const Spectrum>& x);

struct IdResult {
  std::vector<std::string> names;  ///< library order
  std::vector<double> responses;
  std::vector<double> confidences;
  std::string top;
  std::string method;
  std::string hyperparams;

  double confidence_of(const std::string& name) const;
};

/// Cosine between standardize(superpixel) and standardize(inv_sqrt s) for each
/// entry (negated reference in absorption mode), "None" fixed at 0, then
/// softmax(beta * response). Argmax ties resolve to "None", then library order.
IdResult identify(const Spectrum& superpixel, const SpectralLibrary& library, const detect::WhiteningModel& model,
                  double beta = 10.0, SignMode sign_mode = SignMode::Absorption);

/// JSON object with confidences sorted by decreasing value.
std::string to_json(const IdResult& r);

}  // namespace plume::identify

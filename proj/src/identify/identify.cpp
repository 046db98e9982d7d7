#include "plume/identify/identify.hpp"

#include "plume/core/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace plume::identify {

SpectralLibrary::SpectralLibrary(std::vector<LibraryEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2) throw DomainError("spectral library needs at least two entries");
  std::set<std::string> names;
  bool has_none = false;
  for (const auto& e : entries_) {
    if (!names.insert(e.name).second) throw DomainError("duplicate library entry '" + e.name + "'");
    if (e.absorption.size() != entries_.front().absorption.size() || e.absorption.size() == 0) {
      throw DomainError("library entries must share a non-zero band count");
    }
    if (!e.absorption.allFinite()) throw DomainError("library entry '" + e.name + "' is not finite");
    has_none = has_none || e.name == kNoneEntry;
  }
  if (!has_none) throw DomainError("spectral library must include a 'None' entry");
}

SpectralLibrary SpectralLibrary::from_gases(const std::vector<sim::GasSpec>& gases) {
  if (gases.empty()) throw DomainError("no gases given");
  std::vector<LibraryEntry> e;
  for (const auto& g : gases) e.push_back({g.name, g.absorption});
  e.push_back({kNoneEntry, Spectrum::Zero(gases.front().absorption.size())});
  return SpectralLibrary(std::move(e));
}

int SpectralLibrary::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return static_cast<int>(i);
  }
  throw DomainError("no library entry '" + name + "'");
}

std::vector<Spectrum> SpectralLibrary::whitened_refs(const detect::WhiteningModel& model) const {
  if (model.bands() != bands()) throw DomainError("library and whitening band counts differ");
  std::vector<Spectrum> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(model.whiten_target(e.absorption));
  return out;
}

void write_library(const SpectralLibrary& lib, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "name";
  for (int b = 0; b < lib.bands(); ++b) os << ",b" << b;
  os << '\n';
  os.precision(17);
  for (const auto& e : lib.entries()) {
    os << e.name;
    for (int b = 0; b < lib.bands(); ++b) os << ',' << e.absorption[b];
    os << '\n';
  }
}

SpectralLibrary read_library(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("library file is empty");
  std::vector<LibraryEntry> entries;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    LibraryEntry e;
    std::getline(ss, e.name, ',');
    std::vector<double> v;
    try {
      while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("non-numeric absorption value for '" + e.name + "'");
    }
    e.absorption = Eigen::Map<const Spectrum>(v.data(), static_cast<Eigen::Index>(v.size()));
    entries.push_back(std::move(e));
  }
  return SpectralLibrary(std::move(entries));
}

Spectrum whitened_superpixel(const detect::WhiteningModel& model, const RadianceCube& cube,
                             const bg::BackgroundEstimate& estimate) {
  if (estimate.roi_pixels.empty()) throw DomainError("superpixel of an empty ROI");
  if (estimate.backgrounds.cols() != cube.bands() || model.bands() != cube.bands()) {
    throw DomainError("estimate, cube and model band counts differ");
  }
  // inv_sqrt is linear, so the mean of whitened differences is inv_sqrt
  // applied to the mean difference.
  Spectrum diff = Spectrum::Zero(cube.bands());
  for (std::size_t i = 0; i < estimate.roi_pixels.size(); ++i) {
    diff += cube.spectrum(estimate.roi_pixels[i]) - estimate.backgrounds.row(static_cast<Eigen::Index>(i)).transpose();
  }
  diff /= static_cast<double>(estimate.roi_pixels.size());
  return model.inv_sqrt() * diff;
}

Spectrum standardize(const Eigen::Ref<const Spectrum>& x) {
  if (x.size() < 2) throw DomainError("standardize needs at least two values");
  const double mu = x.mean();
  const Spectrum c = x.array() - mu;
  const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(x.size()));
  return c / std::max(sd, 1e-12);
}

double IdResult::confidence_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return confidences[i];
  }
  throw DomainError("no confidence for '" + name + "'");
}

IdResult identify(const Spectrum& superpixel, const SpectralLibrary& library, const detect::WhiteningModel& model,
                  double beta, SignMode sign_mode) {
  if (superpixel.size() != library.bands()) throw DomainError("superpixel and library band counts differ");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and non-negative");
  const Spectrum z = standardize(superpixel);
  const double zn = z.norm();
  const auto refs = library.whitened_refs(model);
  const double sign = sign_mode == SignMode::Absorption ? -1.0 : 1.0;

  IdResult r;
  const auto n = static_cast<std::size_t>(library.size());
  r.responses.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    r.names.push_back(library.entries()[i].name);
    if (r.names[i] == kNoneEntry) continue;
    const Spectrum ref = sign * standardize(refs[i]);
    const double rn = ref.norm();
    r.responses[i] = (zn > 0.0 && rn > 0.0) ? std::clamp(z.dot(ref) / (zn * rn), -1.0, 1.0) : 0.0;
  }
  const double peak = *std::max_element(r.responses.begin(), r.responses.end());
  r.confidences.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += r.confidences[i] = std::exp(beta * (r.responses[i] - peak));
  for (double& c : r.confidences) c /= total;

  const std::size_t none = static_cast<std::size_t>(library.index_of(kNoneEntry));
  std::size_t best = none;
  for (std::size_t i = 0; i < n; ++i) {
    if (r.responses[i] > r.responses[best]) best = i;
  }
  r.top = r.names[best];
  return r;
}

std::string to_json(const IdResult& r) {
  std::vector<std::size_t> order(r.names.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return r.confidences[a] > r.confidences[b]; });
  nlohmann::json j;
  j["top"] = r.top;
  j["method"] = r.method;
  j["hyperparams"] = r.hyperparams;
  j["confidences"] = nlohmann::json::array();
  for (auto i : order) {
    j["confidences"].push_back({{"name", r.names[i]}, {"confidence", r.confidences[i]}, {"response", r.responses[i]}});
  }
  return j.dump(2);
}

}  // namespace plume::identify

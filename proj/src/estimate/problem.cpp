#include "plume/estimate/estimators.hpp"

#include "plume/core/error.hpp"
#include "plume/core/morphology.hpp"

#include <algorithm>
#include <cctype>

namespace plume::bg {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Global: return "Global";
    case Method::KMeans: return "KMeans";
    case Method::PCA: return "PCA";
    case Method::KNN: return "KNN";
    case Method::Annulus: return "Annulus";
    case Method::KNS: return "KNS";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  const std::string n = lower(name);
  for (Method m : all_methods()) {
    if (lower(to_string(m)) == n) return m;
  }
  if (n == "kmeans++") return Method::KMeans;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::Global, Method::KMeans, Method::PCA,
                                     Method::KNN,    Method::Annulus, Method::KNS};
  return m;
}

std::string to_string(Linkage l) {
  switch (l) {
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
    case Linkage::Average: return "average";
  }
  return "?";
}

Linkage parse_linkage(std::string_view name) {
  const std::string n = lower(name);
  if (n == "single") return Linkage::Single;
  if (n == "complete") return Linkage::Complete;
  if (n == "average") return Linkage::Average;
  throw ConfigError("unknown linkage '" + std::string(name) + "'");
}

std::string to_string(SignMode s) { return s == SignMode::Emission ? "emission" : "absorption"; }

SignMode parse_sign_mode(std::string_view name) {
  const std::string n = lower(name);
  if (n == "emission") return SignMode::Emission;
  if (n == "absorption") return SignMode::Absorption;
  throw ConfigError("unknown sign mode '" + std::string(name) + "'");
}

std::string Hyperparams::label() const {
  switch (method) {
    case Method::Global: return "-";
    case Method::KNS:
      return "k=" + std::to_string(kns.min_pixels) + ",linkage=" + to_string(kns.linkage) +
             ",bts=" + (kns.use_bts ? "on" : "off");
    default: return "k=" + std::to_string(k);
  }
}

BackgroundProblem::BackgroundProblem(const RadianceCube& cube, PixelMask roi, PixelMask guard, const PixelMask* exclude)
    : cube_(&cube), roi_(std::move(roi)), guard_(std::move(guard)) {
  const PixelMask shape(cube.height(), cube.width());
  if (!roi_.same_shape(shape) || !guard_.same_shape(shape) || (exclude && !exclude->same_shape(shape))) {
    throw DomainError("masks do not match the cube dimensions");
  }
  if (!roi_.any()) throw DomainError("ROI is empty");
  PixelMask blocked = roi_ | guard_;
  if (exclude) blocked = blocked | *exclude;
  pool_ = ~blocked;
  if (!pool_.any()) throw DomainError("no background pixels outside the ROI and guardrail");
  roi_pixels_ = roi_.indices();
  pool_pixels_ = pool_.indices();
  roi_spectra_ = cube.gather(roi_pixels_);
  pool_spectra_ = cube.gather(pool_pixels_);
}

BackgroundProblem BackgroundProblem::with_guardrail(const RadianceCube& cube, const PixelMask& roi,
                                                    const PixelMask* exclude) {
  return BackgroundProblem(cube, roi, make_guardrail(roi), exclude);
}

}  // namespace plume::bg

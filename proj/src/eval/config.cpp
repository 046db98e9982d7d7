#include "plume/eval/config.hpp"

#include "plume/core/error.hpp"

#include <fstream>
#include <set>

namespace plume::eval {

namespace {

using nlohmann::json;

/// Reads keys from one JSON object and rejects any it did not consume.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown config key '" + path_ + "." + k + "'");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!j_[key].is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!j_[key].is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!j_[key].is_number()) throw ConfigError("");
      }
      out = j_[key].get<T>();
    } catch (const std::exception&) {
      throw ConfigError("config key '" + path_ + "." + key + "' has the wrong type");
    }
  }
  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string sub(const char* key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

template <typename T>
void parse_enum(Reader& r, const char* key, T& out, T (*parse)(std::string_view)) {
  if (!r.has(key)) return;
  const json& v = r.at(key);
  if (!v.is_string()) throw ConfigError(r.sub(key) + " must be a string");
  try {
    out = parse(v.get<std::string>());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.methods = bg::all_methods();
  c.grids = MethodGrids::full();
  c.grids.kmeans = {2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128};
  return c;
}

void ExperimentConfig::validate() const {
  require(scene.height >= 16 && scene.width >= 16, "scene must be at least 16x16");
  require(scene.bands >= 2, "scene needs at least 2 bands");
  require(scene.material_count >= 1, "material_count must be >= 1");
  require(scene.noise_level >= 0.0, "noise_level must be >= 0");
  require(scene.temperature_amplitude_k >= 0.0 && scene.temperature_amplitude_k <= 3.0,
          "temperature_amplitude_k must be in [0, 3]");
  require(plume.wind_speed_m_s > 0.0, "wind_speed must be > 0");
  require(plume.steps >= 1, "plume steps must be >= 1");
  require(plume.meander_sigma_rad >= 0.0, "meander_sigma must be >= 0");
  require(plume.pixel_size_m > 0.0, "pixel_size_m must be > 0");
  require(plume.cutoff >= 0.0 && plume.cutoff < 1.0, "plume cutoff must be in [0, 1)");
  require(far > 0.0 && far < 1.0, "far must be in (0, 1)");
  require(min_roi_size >= 1, "min_roi_size must be >= 1");
  require(calibration.trials >= 1, "calibration trials must be >= 1");
  require(calibration.tolerance > 0.0 && calibration.tolerance <= 0.05, "calibration tolerance must be in (0, 0.05]");
  require(calibration.max_steps >= 1, "calibration max_steps must be >= 1");
  require(calibration.t_min_k > 0.0, "t_min_k must be > 0");
  require(!gases.empty(), "at least one gas is required");
  for (double s : strengths) require(s > 0.0 && s < 1.0, "strengths must lie in (0, 1)");
  require(!strengths.empty(), "at least one strength is required");
  require(scene_seeds >= 1, "scene_seeds must be >= 1");
  require(identifier.beta >= 0.0, "beta must be >= 0");
  require(!h_minima || *h_minima >= 0.0, "h_minima must be >= 0");
  require(!methods.empty(), "at least one method is required");
  for (int k : grids.kmeans) require(k >= 2, "kmeans grid values must be >= 2");
  for (int k : grids.pca) require(k >= 1 && k <= scene.bands, "pca grid values must lie in [1, bands]");
  for (int k : grids.knn) require(k >= 1, "knn grid values must be >= 1");
  for (int k : grids.annulus) require(k >= 1, "annulus grid values must be >= 1");
  for (int k : grids.kns_k) require(k >= 1, "kns k values must be >= 1");
  for (bg::Method m : methods) {
    if (m != bg::Method::Global) require(!grids.grid(m).empty(), "empty grid for " + bg::to_string(m));
  }
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c = defaults();
  Reader r(j, "config");
  r.get("seed", c.seed);
  if (r.has("scene")) {
    Reader s(r.at("scene"), "scene");
    s.get("height", c.scene.height);
    s.get("width", c.scene.width);
    s.get("bands", c.scene.bands);
    s.get("material_count", c.scene.material_count);
    parse_enum(s, "layout", c.scene.layout, sim::parse_layout);
    s.get("region_count", c.scene.region_count);
    s.get("noise_level", c.scene.noise_level);
    s.get("temperature_amplitude_k", c.scene.temperature_amplitude_k);
    s.get("atmosphere_temperature_k", c.scene.atmosphere_temperature_k);
  }
  if (r.has("plume")) {
    Reader p(r.at("plume"), "plume");
    p.get("wind_speed_m_s", c.plume.wind_speed_m_s);
    p.get("wind_direction_rad", c.plume.wind_direction_rad);
    p.get("meander_sigma_rad", c.plume.meander_sigma_rad);
    parse_enum(p, "stability", c.plume.stability, sim::parse_stability);
    p.get("steps", c.plume.steps);
    p.get("pixel_size_m", c.plume.pixel_size_m);
    p.get("release_height_m", c.plume.release_height_m);
    p.get("cutoff", c.plume.cutoff);
  }
  if (r.has("detection")) {
    Reader d(r.at("detection"), "detection");
    d.get("far", c.far);
    d.get("min_roi_size", c.min_roi_size);
  }
  if (r.has("calibration")) {
    Reader k(r.at("calibration"), "calibration");
    k.get("trials", c.calibration.trials);
    k.get("tolerance", c.calibration.tolerance);
    k.get("max_steps", c.calibration.max_steps);
    k.get("t_min_k", c.calibration.t_min_k);
  }
  if (r.has("experiment")) {
    Reader e(r.at("experiment"), "experiment");
    e.get("gases", c.gases);
    e.get("strengths", c.strengths);
    e.get("scene_seeds", c.scene_seeds);
    if (e.has("methods")) {
      const json& m = e.at("methods");
      if (!m.is_array()) throw ConfigError("experiment.methods must be an array");
      c.methods.clear();
      for (const auto& v : m) {
        if (!v.is_string()) throw ConfigError("experiment.methods entries must be strings");
        c.methods.push_back(bg::parse_method(v.get<std::string>()));
      }
    }
  }
  if (r.has("identifier")) {
    Reader i(r.at("identifier"), "identifier");
    i.get("beta", c.identifier.beta);
    parse_enum(i, "sign_mode", c.identifier.sign_mode, bg::parse_sign_mode);
  }
  if (r.has("segmentation")) {
    Reader s(r.at("segmentation"), "segmentation");
    if (s.has("h_minima")) {
      const json& h = s.at("h_minima");
      if (h.is_null()) {
        c.h_minima.reset();
      } else if (h.is_number()) {
        c.h_minima = h.get<double>();
      } else {
        throw ConfigError("segmentation.h_minima must be a number or null");
      }
    }
  }
  if (r.has("sweep")) {
    Reader g(r.at("sweep"), "sweep");
    g.get("kmeans", c.grids.kmeans);
    g.get("pca", c.grids.pca);
    g.get("knn", c.grids.knn);
    g.get("annulus", c.grids.annulus);
    g.get("kns_k", c.grids.kns_k);
    g.get("kns_bts", c.grids.kns_bts);
    g.get("kmeans_seed", c.grids.kmeans_seed);
    if (g.has("kns_linkages")) {
      const json& l = g.at("kns_linkages");
      if (!l.is_array()) throw ConfigError("sweep.kns_linkages must be an array");
      c.grids.linkages.clear();
      for (const auto& v : l) {
        if (!v.is_string()) throw ConfigError("sweep.kns_linkages entries must be strings");
        c.grids.linkages.push_back(bg::parse_linkage(v.get<std::string>()));
      }
    }
  }
  c.grids.sign_mode = c.identifier.sign_mode;
  c.validate();
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["scene"] = {{"height", scene.height},
                {"width", scene.width},
                {"bands", scene.bands},
                {"material_count", scene.material_count},
                {"layout", sim::to_string(scene.layout)},
                {"region_count", scene.region_count},
                {"noise_level", scene.noise_level},
                {"temperature_amplitude_k", scene.temperature_amplitude_k},
                {"atmosphere_temperature_k", scene.atmosphere_temperature_k}};
  j["plume"] = {{"wind_speed_m_s", plume.wind_speed_m_s},
                {"wind_direction_rad", plume.wind_direction_rad},
                {"meander_sigma_rad", plume.meander_sigma_rad},
                {"stability", std::string(1, sim::to_char(plume.stability))},
                {"steps", plume.steps},
                {"pixel_size_m", plume.pixel_size_m},
                {"release_height_m", plume.release_height_m},
                {"cutoff", plume.cutoff}};
  j["detection"] = {{"far", far}, {"min_roi_size", min_roi_size}};
  j["calibration"] = {{"trials", calibration.trials},
                      {"tolerance", calibration.tolerance},
                      {"max_steps", calibration.max_steps},
                      {"t_min_k", calibration.t_min_k}};
  json methods_json = json::array();
  for (auto m : methods) methods_json.push_back(bg::to_string(m));
  j["experiment"] = {{"gases", gases}, {"strengths", strengths}, {"scene_seeds", scene_seeds}, {"methods", methods_json}};
  j["identifier"] = {{"beta", identifier.beta}, {"sign_mode", bg::to_string(identifier.sign_mode)}};
  j["segmentation"] = {{"h_minima", h_minima ? json(*h_minima) : json(nullptr)}};
  json linkages = json::array();
  for (auto l : grids.linkages) linkages.push_back(bg::to_string(l));
  j["sweep"] = {{"kmeans", grids.kmeans},   {"pca", grids.pca},         {"knn", grids.knn},
                {"annulus", grids.annulus}, {"kns_k", grids.kns_k},     {"kns_linkages", linkages},
                {"kns_bts", grids.kns_bts}, {"kmeans_seed", grids.kmeans_seed}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

}  // namespace plume::eval

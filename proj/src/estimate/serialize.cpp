#include "plume/core/error.hpp"
#include "plume/estimate/estimators.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace plume::bg {

namespace {

nlohmann::json hyperparams_json(const Hyperparams& hp) {
  nlohmann::json j = nlohmann::json::object();
  switch (hp.method) {
    case Method::Global: break;
    case Method::KMeans:
      j["clusters"] = hp.k;
      j["seed"] = hp.seed;
      break;
    case Method::PCA: j["components"] = hp.k; break;
    case Method::KNN: j["neighbors"] = hp.k; break;
    case Method::Annulus: j["dilations"] = hp.k; break;
    case Method::KNS:
      j["min_pixels"] = hp.kns.min_pixels;
      j["linkage"] = to_string(hp.kns.linkage);
      j["use_bts"] = hp.kns.use_bts;
      j["sign_mode"] = to_string(hp.kns.sign_mode);
      break;
  }
  return j;
}

Hyperparams hyperparams_from_json(Method m, const nlohmann::json& j) {
  Hyperparams hp = Hyperparams::of(m);
  try {
    switch (m) {
      case Method::Global: break;
      case Method::KMeans:
        hp.k = j.at("clusters").get<int>();
        hp.seed = j.at("seed").get<std::uint64_t>();
        break;
      case Method::PCA: hp.k = j.at("components").get<int>(); break;
      case Method::KNN: hp.k = j.at("neighbors").get<int>(); break;
      case Method::Annulus: hp.k = j.at("dilations").get<int>(); break;
      case Method::KNS:
        hp.kns.min_pixels = j.at("min_pixels").get<int>();
        hp.kns.linkage = parse_linkage(j.at("linkage").get<std::string>());
        hp.kns.use_bts = j.at("use_bts").get<bool>();
        hp.kns.sign_mode = parse_sign_mode(j.at("sign_mode").get<std::string>());
        hp.k = hp.kns.min_pixels;
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad estimate sidecar: ") + e.what());
  }
  return hp;
}

}  // namespace

void write_estimate(const BackgroundEstimate& e, const std::filesystem::path& csv_path) {
  std::ofstream os(csv_path);
  if (!os) throw IoError("cannot open '" + csv_path.string() + "' for writing");
  os << "row,col";
  for (Eigen::Index b = 0; b < e.backgrounds.cols(); ++b) os << ",b" << b;
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < e.roi_pixels.size(); ++i) {
    const Pixel px = e.pixel(i);
    os << px.row << ',' << px.col;
    for (Eigen::Index b = 0; b < e.backgrounds.cols(); ++b) {
      std::snprintf(buf, sizeof buf, "%.17g", e.backgrounds(static_cast<Eigen::Index>(i), b));
      os << ',' << buf;
    }
    os << '\n';
  }
  nlohmann::json side;
  side["method"] = to_string(e.method());
  side["hyperparams"] = hyperparams_json(e.hyperparams);
  side["roi_pixel_count"] = e.roi_pixels.size();
  side["band_count"] = e.backgrounds.cols();
  std::ofstream js(csv_path.string() + ".json");
  if (!js) throw IoError("cannot write estimate sidecar");
  js << side.dump(2) << '\n';
}

BackgroundEstimate read_estimate(const std::filesystem::path& csv_path, int width) {
  std::ifstream js(csv_path.string() + ".json");
  if (!js) throw IoError("missing sidecar for '" + csv_path.string() + "'");
  nlohmann::json side;
  try {
    js >> side;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad estimate sidecar: ") + e.what());
  }
  BackgroundEstimate e;
  e.width = width;
  e.hyperparams = hyperparams_from_json(parse_method(side.at("method").get<std::string>()), side.at("hyperparams"));

  std::ifstream is(csv_path);
  if (!is) throw IoError("cannot open '" + csv_path.string() + "'");
  std::string line;
  std::getline(is, line);
  const auto bands = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') - 1);
  if (bands < 1) throw ConfigError("estimate CSV has no band columns");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (static_cast<Eigen::Index>(v.size()) != bands + 2) throw ConfigError("estimate CSV row has the wrong width");
    e.roi_pixels.push_back(static_cast<int>(v[0]) * width + static_cast<int>(v[1]));
    rows.push_back(std::move(v));
  }
  e.backgrounds.resize(static_cast<Eigen::Index>(rows.size()), bands);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index b = 0; b < bands; ++b) e.backgrounds(static_cast<Eigen::Index>(i), b) = rows[i][static_cast<std::size_t>(b + 2)];
  }
  return e;
}

}  // namespace plume::bg

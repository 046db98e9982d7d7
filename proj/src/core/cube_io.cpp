#include "plume/core/cube_io.hpp"

#include "plume/core/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace plume {

namespace {

using nlohmann::json;

struct Header {
  int height = 0;
  int width = 0;
  int band_count = 0;
  std::vector<double> wavelengths;
  std::string dtype;
};

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "f32" || dtype == "i32") return 4;
  if (dtype == "u8") return 1;
  throw ParseError(ParseError::Kind::MalformedHeader, "unsupported dtype '" + dtype + "'");
}

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

void write_header(std::ofstream& os, const Header& h) {
  json j;
  j["magic"] = kCubeMagic;
  j["height"] = h.height;
  j["width"] = h.width;
  j["band_count"] = h.band_count;
  j["wavelengths"] = h.wavelengths;
  j["dtype"] = h.dtype;
  j["byte_order"] = "little";
  os << j.dump() << '\n';
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

int require_positive_int(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw ParseError(ParseError::Kind::MalformedHeader, std::string("header field '") + key + "' missing or not an integer");
  }
  const auto v = j[key].get<long long>();
  if (v < 1 || v > (1LL << 30)) {
    throw ParseError(ParseError::Kind::MalformedHeader, std::string("header field '") + key + "' out of range");
  }
  return static_cast<int>(v);
}

/// Reads and validates the header; leaves the stream at the payload start.
Header read_header(std::ifstream& is, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(is, line)) {
    throw ParseError(ParseError::Kind::MalformedHeader, "'" + path.string() + "' has no header line");
  }
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(ParseError::Kind::MalformedHeader, "header is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("magic") || j["magic"] != kCubeMagic) {
    throw ParseError(ParseError::Kind::MalformedHeader, "bad magic in '" + path.string() + "'");
  }
  if (!j.contains("byte_order") || j["byte_order"] != "little") {
    throw ParseError(ParseError::Kind::MalformedHeader, "byte_order must be 'little'");
  }
  if (!j.contains("dtype") || !j["dtype"].is_string()) {
    throw ParseError(ParseError::Kind::MalformedHeader, "dtype missing");
  }
  Header h;
  h.height = require_positive_int(j, "height");
  h.width = require_positive_int(j, "width");
  h.band_count = require_positive_int(j, "band_count");
  h.dtype = j["dtype"].get<std::string>();
  dtype_size(h.dtype);
  if (!j.contains("wavelengths") || !j["wavelengths"].is_array()) {
    throw ParseError(ParseError::Kind::MalformedHeader, "wavelengths array missing");
  }
  for (const auto& w : j["wavelengths"]) {
    if (!w.is_number()) throw ParseError(ParseError::Kind::MalformedHeader, "non-numeric wavelength");
    h.wavelengths.push_back(w.get<double>());
  }
  return h;
}

std::vector<char> read_payload(std::ifstream& is, const Header& h) {
  const std::size_t expected = static_cast<std::size_t>(h.height) * static_cast<std::size_t>(h.width) *
                               static_cast<std::size_t>(h.band_count) * dtype_size(h.dtype);
  std::vector<char> buf(expected);
  is.read(buf.data(), static_cast<std::streamsize>(expected));
  const auto got = static_cast<std::size_t>(is.gcount());
  if (got != expected) {
    throw ParseError(ParseError::Kind::TruncatedPayload, "payload truncated: expected " + std::to_string(expected) +
                                                             " bytes, found " + std::to_string(got));
  }
  char extra = 0;
  if (is.read(&extra, 1); is.gcount() != 0) {
    throw ParseError(ParseError::Kind::DimensionMismatch, "payload longer than the header dimensions");
  }
  return buf;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return is;
}

void expect_dtype(const Header& h, const char* dtype, int bands) {
  if (h.dtype != dtype) {
    throw ParseError(ParseError::Kind::MalformedHeader, "expected dtype " + std::string(dtype) + ", got " + h.dtype);
  }
  if (bands > 0 && h.band_count != bands) {
    throw ParseError(ParseError::Kind::DimensionMismatch, "expected a single-band file");
  }
}

template <typename T>
void write_values(std::ofstream& os, const std::vector<T>& values) {
  std::vector<T> le(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) le[i] = to_little(values[i]);
  os.write(reinterpret_cast<const char*>(le.data()), static_cast<std::streamsize>(le.size() * sizeof(T)));
  if (!os) throw IoError("write failed");
}

template <typename T>
std::vector<T> decode(const std::vector<char>& buf) {
  std::vector<T> out(buf.size() / sizeof(T));
  std::memcpy(out.data(), buf.data(), out.size() * sizeof(T));
  for (auto& v : out) v = to_little(v);
  return out;
}

}  // namespace

void write_cube(const RadianceCube& cube, const std::filesystem::path& path) {
  auto os = open_out(path);
  write_header(os, {cube.height(), cube.width(), cube.bands(), cube.grid().wavelengths(), "f32"});
  std::vector<float> values(cube.data().begin(), cube.data().end());
  write_values(os, values);
}

RadianceCube read_cube(const std::filesystem::path& path) {
  auto is = open_in(path);
  const Header h = read_header(is, path);
  expect_dtype(h, "f32", 0);
  if (static_cast<int>(h.wavelengths.size()) != h.band_count) {
    throw ParseError(ParseError::Kind::DimensionMismatch,
                     "header declares " + std::to_string(h.band_count) + " bands but lists " +
                         std::to_string(h.wavelengths.size()) + " wavelengths");
  }
  const auto values = decode<float>(read_payload(is, h));
  return RadianceCube(h.height, h.width, SpectralGrid(h.wavelengths), std::vector<double>(values.begin(), values.end()));
}

void write_mask(const PixelMask& mask, const std::filesystem::path& path) {
  auto os = open_out(path);
  write_header(os, {mask.height(), mask.width(), 1, {}, "u8"});
  write_values(os, mask.bits());
}

PixelMask read_mask(const std::filesystem::path& path) {
  auto is = open_in(path);
  const Header h = read_header(is, path);
  expect_dtype(h, "u8", 1);
  const auto bits = decode<std::uint8_t>(read_payload(is, h));
  PixelMask m(h.height, h.width);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw ParseError(ParseError::Kind::MalformedHeader, "mask values must be 0 or 1");
    m.set(static_cast<int>(i), bits[i] == 1);
  }
  return m;
}

void write_scalar_map(const ScalarMap& map, const std::filesystem::path& path) {
  auto os = open_out(path);
  write_header(os, {map.height, map.width, 1, {}, "f32"});
  std::vector<float> values(map.values.begin(), map.values.end());
  write_values(os, values);
}

ScalarMap read_scalar_map(const std::filesystem::path& path) {
  auto is = open_in(path);
  const Header h = read_header(is, path);
  expect_dtype(h, "f32", 1);
  const auto values = decode<float>(read_payload(is, h));
  ScalarMap m(h.height, h.width);
  for (std::size_t i = 0; i < values.size(); ++i) m.values[i] = values[i];
  return m;
}

void write_labels(const LabelImage& labels, const std::filesystem::path& path) {
  if (labels.labels.size() != static_cast<std::size_t>(labels.height) * static_cast<std::size_t>(labels.width)) {
    throw DomainError("label image size mismatch");
  }
  auto os = open_out(path);
  write_header(os, {labels.height, labels.width, 1, {}, "i32"});
  std::vector<std::int32_t> values(labels.labels.begin(), labels.labels.end());
  write_values(os, values);
}

LabelImage read_labels(const std::filesystem::path& path) {
  auto is = open_in(path);
  const Header h = read_header(is, path);
  expect_dtype(h, "i32", 1);
  const auto values = decode<std::int32_t>(read_payload(is, h));
  return {h.height, h.width, std::vector<int>(values.begin(), values.end())};
}

}  // namespace plume

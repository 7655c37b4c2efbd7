// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/cube.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "cycfuse/error.hpp"

namespace cycfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kHeaderSuffix = ".hsc.json";
constexpr const char* kPayloadSuffix = ".hsc.bin";

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string stem_of(const fs::path& header) {
  std::string file = header.filename().string();
  return file.substr(0, file.size() - std::char_traits<char>::length(kHeaderSuffix));
}

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
}

int positive_dim(const json& header, const char* key) {
  if (!header.contains(key) || !header[key].is_number_integer()) {
    throw FormatError(std::string("cube header: missing integer key '") + key + "'");
  }
  const auto v = header[key].get<long long>();
  if (v <= 0 || v > (1LL << 30)) {
    throw FormatError(std::string("cube header: '") + key + "' must be a positive integer");
  }
  return static_cast<int>(v);
}

}  // namespace

HsiCube::HsiCube(int bands, int rows, int cols, std::vector<float> data,
                 std::optional<std::vector<double>> wavelengths_nm, std::string name)
    : bands_(bands),
      rows_(rows),
      cols_(cols),
      data_(std::move(data)),
      wavelengths_nm_(std::move(wavelengths_nm)),
      name_(std::move(name)) {
  if (bands <= 0 || rows <= 0 || cols <= 0) {
    throw ShapeError("HsiCube: dimensions must be positive");
  }
  const auto expected = static_cast<std::size_t>(bands) * rows * cols;
  if (data_.size() != expected) {
    throw ShapeError("HsiCube: data length " + std::to_string(data_.size()) + " != bands*rows*cols = " +
                     std::to_string(expected));
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw DataError("HsiCube: non-finite value");
    if (v < 0.0f || v > 1.0f) throw DataError("HsiCube: value outside [0,1]");
  }
  if (wavelengths_nm_) {
    const auto& wl = *wavelengths_nm_;
    if (wl.size() != static_cast<std::size_t>(bands)) {
      throw ShapeError("HsiCube: wavelengths_nm length must equal band count");
    }
    for (std::size_t i = 1; i < wl.size(); ++i) {
      if (!(wl[i] > wl[i - 1])) throw DataError("HsiCube: wavelengths_nm must be strictly increasing");
    }
  }
}

HsiCube HsiCube::filled(int bands, int rows, int cols, float value, std::string name) {
  if (bands <= 0 || rows <= 0 || cols <= 0) throw ShapeError("HsiCube: dimensions must be positive");
  return HsiCube(bands, rows, cols,
                 std::vector<float>(static_cast<std::size_t>(bands) * rows * cols, value), std::nullopt,
                 std::move(name));
}

std::span<const float> HsiCube::band(int b) const {
  if (b < 0 || b >= bands_) throw IndexError("band index " + std::to_string(b) + " out of range");
  return std::span<const float>(data_).subspan(static_cast<std::size_t>(b) * pixels(), pixels());
}

fs::path cube_header_path(const fs::path& path) {
  if (ends_with(path.filename().string(), kHeaderSuffix)) return path;
  return fs::path(path.string() + kHeaderSuffix);
}

HsiCube load_cube(const fs::path& header_path) {
  std::ifstream in(header_path);
  if (!in) throw FormatError("cannot open cube header " + header_path.string());

  json header;
  try {
    header = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("corrupt cube header " + header_path.string() + ": " + e.what());
  }
  if (!header.is_object()) throw FormatError("cube header must be a JSON object");

  const int bands = positive_dim(header, "bands");
  const int rows = positive_dim(header, "rows");
  const int cols = positive_dim(header, "cols");
  if (header.value("dtype", "") != "f32le") throw FormatError("cube header: dtype must be \"f32le\"");
  if (header.value("layout", "") != "band-row-col") {
    throw FormatError("cube header: layout must be \"band-row-col\"");
  }
  if (!header.contains("payload") || !header["payload"].is_string()) {
    throw FormatError("cube header: missing 'payload'");
  }

  std::optional<std::vector<double>> wavelengths;
  if (header.contains("wavelengths_nm") && !header["wavelengths_nm"].is_null()) {
    try {
      wavelengths = header["wavelengths_nm"].get<std::vector<double>>();
    } catch (const json::exception&) {
      throw FormatError("cube header: wavelengths_nm must be a list of numbers");
    }
  }
  std::string name = header.contains("name") && header["name"].is_string() ? header["name"].get<std::string>() : "";
  const bool normalized = header.value("normalized", true);

  const fs::path payload = header_path.parent_path() / header["payload"].get<std::string>();
  std::ifstream bin(payload, std::ios::binary);
  if (!bin) throw IntegrityError("cannot open cube payload " + payload.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

  const std::size_t count = static_cast<std::size_t>(bands) * rows * cols;
  if (bytes.size() != count * 4) {
    throw IntegrityError("cube payload " + payload.string() + " has " + std::to_string(bytes.size()) +
                         " bytes, header requires " + std::to_string(count * 4));
  }

  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t raw;
    std::memcpy(&raw, bytes.data() + 4 * i, 4);
    data[i] = std::bit_cast<float>(to_little(raw));
    if (!std::isfinite(data[i])) throw DataError("cube payload contains non-finite values");
  }

  if (normalized) {
    for (float& v : data) v = std::clamp(v, 0.0f, 1.0f);
  } else {
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    const double min = *lo;
    const double max = *hi;
    const double range = max - min;
    for (float& v : data) {
      v = range > 0.0 ? static_cast<float>(std::clamp((v - min) / range, 0.0, 1.0)) : 0.0f;
    }
    std::ostringstream tag;
    tag.precision(9);
    tag << "|minmax=" << min << "," << max;
    name += tag.str();
  }
  return HsiCube(bands, rows, cols, std::move(data), std::move(wavelengths), std::move(name));
}

void save_cube(const HsiCube& cube, const fs::path& path) {
  const fs::path header_path = cube_header_path(path);
  const std::string stem = stem_of(header_path);
  const fs::path payload = header_path.parent_path() / (stem + kPayloadSuffix);

  json header;
  header["bands"] = cube.bands();
  header["rows"] = cube.rows();
  header["cols"] = cube.cols();
  header["dtype"] = "f32le";
  header["layout"] = "band-row-col";
  header["payload"] = stem + kPayloadSuffix;
  if (cube.wavelengths_nm()) header["wavelengths_nm"] = *cube.wavelengths_nm();
  if (!cube.name().empty()) header["name"] = cube.name();

  {
    std::ofstream out(header_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cube header " + header_path.string());
    out << header.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + header_path.string());
  }

  std::vector<char> bytes(cube.size() * 4);
  const auto values = cube.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint32_t raw = to_little(std::bit_cast<std::uint32_t>(values[i]));
    std::memcpy(bytes.data() + 4 * i, &raw, 4);
  }
  std::ofstream out(payload, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write cube payload " + payload.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + payload.string());
}

unsigned char to_8bit(float v) {
  const double scaled = 255.0 * std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(scaled));
}

void export_band_image(const HsiCube& cube, int band, const fs::path& path) {
  if (band < 0 || band >= cube.bands()) {
    throw IndexError("band " + std::to_string(band) + " out of range [0," + std::to_string(cube.bands()) + ")");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << cube.cols() << ' ' << cube.rows() << "\n255\n";
  std::vector<unsigned char> pixels;
  pixels.reserve(cube.pixels());
  for (float v : cube.band(band)) pixels.push_back(to_8bit(v));
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace cycfuse

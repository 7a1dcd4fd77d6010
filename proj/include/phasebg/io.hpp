#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "phasebg/field.hpp"

namespace phasebg {

// PHM1 field container, fixed little-endian layout:
//   bytes 0-4  magic "PHM1\0"
//   byte  5    dtype: 0 real f32, 1 real f64, 2 complex f32 pairs, 3 complex f64 pairs
//   byte  6    unit:  0 dimensionless, 1 radians, 2 ppm
//   byte  7    ndim (always 2)
//   bytes 8-15 rows, cols as uint32 little-endian
//   payload    row-major little-endian values

enum class Dtype : std::uint8_t { real32 = 0, real64 = 1, complex64 = 2, complex128 = 3 };

using FieldVariant = std::variant<ScalarField2D, ComplexImage2D>;

namespace detail {

inline void put_u32le(std::string& s, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

template <typename T>
inline void append_value(std::string& s, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  s.append(buf, sizeof(T));  // little-endian host assumed; asserted in tests
}

template <typename T>
inline T read_value(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

/// Writes content to a temporary file in the same directory, then renames it
/// over the destination so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_all(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace detail

inline void write_field(const std::filesystem::path& path, const ScalarField2D& field,
                        Dtype dtype = Dtype::real64) {
  if (dtype != Dtype::real32 && dtype != Dtype::real64)
    throw std::invalid_argument("write_field: real field needs a real dtype");
  std::string out;
  out.reserve(16 + field.size() * 8);
  out.append("PHM1", 4);
  out.push_back('\0');
  out.push_back(static_cast<char>(dtype));
  out.push_back(static_cast<char>(field.unit()));
  out.push_back(2);
  detail::put_u32le(out, static_cast<std::uint32_t>(field.rows()));
  detail::put_u32le(out, static_cast<std::uint32_t>(field.cols()));
  for (double v : field.data()) {
    if (dtype == Dtype::real32)
      detail::append_value(out, static_cast<float>(v));
    else
      detail::append_value(out, v);
  }
  detail::atomic_write(path, out);
}

inline void write_field(const std::filesystem::path& path, const ComplexImage2D& image,
                        Dtype dtype = Dtype::complex128) {
  if (dtype != Dtype::complex64 && dtype != Dtype::complex128)
    throw std::invalid_argument("write_field: complex image needs a complex dtype");
  std::string out;
  out.reserve(16 + image.size() * 16);
  out.append("PHM1", 4);
  out.push_back('\0');
  out.push_back(static_cast<char>(dtype));
  out.push_back(0);  // unit: complex images carry no unit
  out.push_back(2);
  detail::put_u32le(out, static_cast<std::uint32_t>(image.rows()));
  detail::put_u32le(out, static_cast<std::uint32_t>(image.cols()));
  for (const auto& v : image.data()) {
    if (dtype == Dtype::complex64) {
      detail::append_value(out, static_cast<float>(v.real()));
      detail::append_value(out, static_cast<float>(v.imag()));
    } else {
      detail::append_value(out, v.real());
      detail::append_value(out, v.imag());
    }
  }
  detail::atomic_write(path, out);
}

inline FieldVariant read_field(const std::filesystem::path& path) {
  const std::string raw = detail::read_all(path);
  if (raw.size() < 16 || raw.compare(0, 4, "PHM1") != 0 || raw[4] != '\0')
    throw std::runtime_error("PHM1 magic mismatch: " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  const std::uint8_t dtype = p[5], unit = p[6], ndim = p[7];
  if (ndim != 2)
    throw std::runtime_error("PHM1 ndim unsupported (expected 2): " + path.string());
  if (dtype > 3) throw std::runtime_error("PHM1 unknown dtype code: " + path.string());
  if (unit > 2) throw std::runtime_error("PHM1 unknown unit code: " + path.string());
  const std::size_t rows = detail::get_u32le(p + 8), cols = detail::get_u32le(p + 12);
  const std::size_t n = rows * cols;
  const std::size_t value_bytes = (dtype == 0) ? 4 : (dtype == 1) ? 8 : (dtype == 2) ? 8 : 16;
  if (raw.size() != 16 + n * value_bytes)
    throw std::runtime_error("PHM1 truncated or oversized payload: " + path.string());

  const unsigned char* d = p + 16;
  if (dtype <= 1) {
    ScalarField2D f(rows, cols, 0.0, static_cast<Unit>(unit));
    for (std::size_t k = 0; k < n; ++k)
      f.data()[k] = (dtype == 0) ? static_cast<double>(detail::read_value<float>(d + 4 * k))
                                 : detail::read_value<double>(d + 8 * k);
    return f;
  }
  ComplexImage2D img(rows, cols);
  for (std::size_t k = 0; k < n; ++k) {
    if (dtype == 2)
      img.data()[k] = {static_cast<double>(detail::read_value<float>(d + 8 * k)),
                       static_cast<double>(detail::read_value<float>(d + 8 * k + 4))};
    else
      img.data()[k] = {detail::read_value<double>(d + 16 * k),
                       detail::read_value<double>(d + 16 * k + 8)};
  }
  return img;
}

/// Headerless CSV, real values only, uniform row lengths.
inline ScalarField2D read_csv(const std::filesystem::path& path, Unit unit = Unit::dimensionless) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::size_t c = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++c;
    }
    if (rows == 0)
      cols = c;
    else if (c != cols)
      throw std::runtime_error("CSV rows have unequal lengths: " + path.string());
    ++rows;
  }
  if (rows == 0) throw std::runtime_error("CSV is empty: " + path.string());
  return ScalarField2D(rows, cols, std::move(values), unit);
}

inline void write_csv(const std::filesystem::path& path, const ScalarField2D& field) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < field.rows(); ++i) {
    for (std::size_t j = 0; j < field.cols(); ++j) {
      if (j) out << ',';
      out << field(i, j);
    }
    out << '\n';
  }
  detail::atomic_write(path, out.str());
}

/// Min-max scaled PGM (P5) export; the scaling is recorded in a sidecar text
/// file "<path>.scale" so the field reconstructs to quantization error.
inline void export_pgm(const std::filesystem::path& path, const ScalarField2D& field,
                       int bits = 16) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("export_pgm: bits must be 8 or 16");
  double lo = field.data()[0], hi = field.data()[0];
  for (double v : field.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = (hi > lo) ? hi - lo : 1.0;
  const std::uint32_t maxval = (bits == 8) ? 255u : 65535u;

  std::ostringstream out;
  out << "P5\n" << field.cols() << ' ' << field.rows() << '\n' << maxval << '\n';
  for (double v : field.data()) {
    const double t = (v - lo) / span;
    const auto q = static_cast<std::uint32_t>(std::lround(t * maxval));
    if (bits == 16) out.put(static_cast<char>((q >> 8) & 0xff));  // PGM is big-endian
    out.put(static_cast<char>(q & 0xff));
  }
  detail::atomic_write(path, out.str());

  std::ostringstream side;
  side.precision(17);
  side << "min " << lo << "\nmax " << hi << "\nbits " << bits << "\nunit "
       << static_cast<int>(field.unit()) << '\n';
  detail::atomic_write(path.string() + ".scale", side.str());
}

struct Histogram {
  std::vector<double> centers;
  std::vector<std::size_t> counts;
  std::size_t below = 0, above = 0;  ///< out-of-range pixels
};

/// Counts pixels into equal-width bins on [lo, hi); the last bin is closed.
inline Histogram make_histogram(const ScalarField2D& field, std::size_t bins, double lo,
                                double hi) {
  if (bins < 1) throw std::invalid_argument("make_histogram: bins must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("make_histogram: range must satisfy lo < hi");
  Histogram h;
  h.centers.resize(bins);
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b)
    h.centers[b] = lo + (static_cast<double>(b) + 0.5) * width;
  for (double v : field.data()) {
    if (v < lo) {
      ++h.below;
    } else if (v > hi) {
      ++h.above;
    } else {
      auto b = static_cast<std::size_t>((v - lo) / width);
      if (b >= bins) b = bins - 1;  // v == hi
      ++h.counts[b];
    }
  }
  return h;
}

inline void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
  std::ostringstream out;
  out.precision(17);
  out << "bin_center,count\n";
  for (std::size_t b = 0; b < h.centers.size(); ++b)
    out << h.centers[b] << ',' << h.counts[b] << '\n';
  out << "# below_range," << h.below << "\n# above_range," << h.above << '\n';
  detail::atomic_write(path, out.str());
}

}  // namespace phasebg

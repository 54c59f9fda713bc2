/* Copyright 2026 The MDBF Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "mdbf/container.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "mdbf/binkernel.hpp"

namespace mdbf {

namespace {

constexpr char kLayerMagic[4] = {'M', 'D', 'B', 'F'};
constexpr char kDenseMagic[4] = {'R', 'T', 'F', '1'};
constexpr std::uint16_t kLayerVersion = 1;
constexpr std::size_t kLayerHeaderSize = 34;

// Rounds man / 2^shift to the nearest integer, ties to even. Callers keep
// man below 2^53, so any shift past 63 underflows to zero.
std::uint64_t round_shift_rne(std::uint64_t man, int shift) {
  if (shift >= 64) {
    return 0;
  }
  const std::uint64_t kept = man >> shift;
  const std::uint64_t rem = man & ((std::uint64_t{1} << shift) - 1);
  const std::uint64_t half = std::uint64_t{1} << (shift - 1);
  if (rem > half || (rem == half && (kept & 1u))) {
    return kept + 1;
  }
  return kept;
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v));
    u16(static_cast<std::uint16_t>(v >> 16));
  }
  void u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v));
    u32(static_cast<std::uint32_t>(v >> 32));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const char* p, std::size_t n) {
    buf_.insert(buf_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

  std::size_t offset() const { return off_; }
  std::size_t size() const { return buf_.size(); }

  std::uint8_t u8() {
    need(1);
    return buf_[off_++];
  }
  std::uint16_t u16() {
    const std::uint16_t lo = u8();
    return static_cast<std::uint16_t>(lo | (u8() << 8));
  }
  std::uint32_t u32() {
    const std::uint32_t lo = u16();
    return lo | (static_cast<std::uint32_t>(u16()) << 16);
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | (static_cast<std::uint64_t>(u32()) << 32);
  }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  void need(std::size_t n) {
    if (off_ + n > buf_.size()) {
      throw FormatError("unexpected end of stream", off_);
    }
  }

  const std::vector<std::uint8_t>& buf_;
  std::size_t off_ = 0;
};

void validate_width(int real_width) {
  if (real_width != 16 && real_width != 32) {
    throw InvalidArgumentError("real width must be 16 or 32");
  }
}

// Rejects values that cannot be stored finitely. Factor names keep the
// error actionable.
void check_storable(const DenseMatrix& m, int real_width, Index term_index,
                    const char* factor) {
  const double limit =
      real_width == 16 ? kHalfMax
                       : static_cast<double>(std::numeric_limits<float>::max());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (std::abs(m(i, j)) > limit) {
        throw RangeError("term " + std::to_string(term_index) + " factor " +
                         factor + " entry (" + std::to_string(i) + "," +
                         std::to_string(j) + ") = " + std::to_string(m(i, j)) +
                         " exceeds the " + std::to_string(real_width) +
                         "-bit range");
      }
    }
  }
}

void write_reals_colmajor(ByteWriter& w, const DenseMatrix& m,
                          int real_width) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (real_width == 16) {
        w.u16(half_from_double(m(i, j)));
      } else {
        w.f32(static_cast<float>(m(i, j)));
      }
    }
  }
}

DenseMatrix read_reals_colmajor(ByteReader& r, Index rows, Index cols,
                                int real_width) {
  DenseMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const std::size_t at = r.offset();
      const double v = real_width == 16 ? half_to_double(r.u16())
                                        : static_cast<double>(r.f32());
      if (!std::isfinite(v)) {
        throw FormatError("non-finite stored real", at);
      }
      m(i, j) = v;
    }
  }
  return m;
}

void write_packed(ByteWriter& w, const SignMatrix& s) {
  const PackedSigns p = pack(s);
  for (const std::uint64_t word : p.words) {
    w.u64(word);
  }
}

SignMatrix read_packed(ByteReader& r, Index rows, Index cols) {
  PackedSigns p;
  p.rows = rows;
  p.cols = cols;
  p.words_per_row = (cols + 63) / 64;
  p.words.resize(static_cast<std::size_t>(rows * p.words_per_row));
  const Index tail_bits = cols % 64;
  for (Index i = 0; i < rows; ++i) {
    for (Index w = 0; w < p.words_per_row; ++w) {
      const std::size_t at = r.offset();
      const std::uint64_t word = r.u64();
      if (tail_bits != 0 && w == p.words_per_row - 1 &&
          (word >> tail_bits) != 0) {
        throw FormatError("nonzero padding bits in packed sign row", at);
      }
      p.words[static_cast<std::size_t>(i * p.words_per_row + w)] = word;
    }
  }
  return unpack(p);
}

std::size_t packed_bytes(Index rows, Index cols) {
  return static_cast<std::size_t>(rows) *
         static_cast<std::size_t>((cols + 63) / 64) * 8;
}

std::size_t layer_byte_size(Index n, Index m, Index r, Index l, Index p,
                            int real_width) {
  const std::size_t wb = static_cast<std::size_t>(real_width) / 8;
  const std::size_t reals =
      static_cast<std::size_t>(l) * static_cast<std::size_t>(n + m + 2 * r);
  const std::size_t per_term =
      packed_bytes(n, r) + packed_bytes(m, r) + reals * wb;
  return kLayerHeaderSize + static_cast<std::size_t>(p) * per_term;
}

double quantize_scalar(double x, int real_width) {
  if (real_width == 16) {
    return half_to_double(half_from_double(x));
  }
  return static_cast<double>(static_cast<float>(x));
}

}  // namespace

std::uint16_t half_from_double(double x) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  const std::uint16_t sign =
      static_cast<std::uint16_t>((bits >> 48) & 0x8000u);
  const int exp = static_cast<int>((bits >> 52) & 0x7ffu);
  std::uint64_t man = bits & 0xfffffffffffffull;

  if (exp == 0x7ff) {
    return man == 0 ? static_cast<std::uint16_t>(sign | 0x7c00u)
                    : static_cast<std::uint16_t>(sign | 0x7e00u);
  }
  if (exp == 0) {
    // Double subnormals are far below the binary16 subnormal range.
    return sign;
  }

  const int e = exp - 1023;
  man |= std::uint64_t{1} << 52;  // value = man * 2^(e-52)
  const int he = e + 15;
  if (he >= 31) {
    return static_cast<std::uint16_t>(sign | 0x7c00u);
  }
  if (he <= 0) {
    // Subnormal target: count of 2^-24 units; a carry to 1024 lands
    // exactly on the smallest normal encoding.
    const std::uint64_t count = round_shift_rne(man, 28 - e);
    return static_cast<std::uint16_t>(sign | count);
  }
  const std::uint64_t kept = round_shift_rne(man, 42);  // in [1024, 2048]
  // (he << 10) + kept - 1024 lets a mantissa carry bump the exponent,
  // including the overflow-to-infinity case at he == 30.
  return static_cast<std::uint16_t>(
      sign + static_cast<std::uint16_t>((he << 10) + kept - 1024));
}

double half_to_double(std::uint16_t h) {
  const bool neg = (h & 0x8000u) != 0;
  const int exp = (h >> 10) & 0x1f;
  const int man = h & 0x3ff;
  double v;
  if (exp == 0) {
    v = std::ldexp(static_cast<double>(man), -24);
  } else if (exp == 31) {
    v = man == 0 ? std::numeric_limits<double>::infinity()
                 : std::numeric_limits<double>::quiet_NaN();
  } else {
    v = std::ldexp(static_cast<double>(1024 + man), exp - 25);
  }
  return neg ? -v : v;
}

std::vector<std::uint8_t> write_layer(const MdbfLayer& layer, int real_width) {
  validate_width(real_width);
  if (layer.terms.empty()) {
    throw InvalidArgumentError("write_layer: layer has no terms");
  }
  const Index n = layer.n(), m = layer.m();
  const Index r = layer.terms.front().r(), l = layer.terms.front().l();
  for (std::size_t k = 0; k < layer.terms.size(); ++k) {
    const MdbfTerm& t = layer.terms[k];
    if (t.n() != n || t.m() != m || t.r() != r || t.l() != l) {
      throw InvalidArgumentError(
          "write_layer: terms do not share (n, m, r, l)");
    }
    check_storable(t.env_a.left, real_width, static_cast<Index>(k), "A");
    check_storable(t.env_a.right, real_width, static_cast<Index>(k), "Q");
    check_storable(t.env_b.left, real_width, static_cast<Index>(k), "B");
    check_storable(t.env_b.right, real_width, static_cast<Index>(k), "G");
  }

  ByteWriter w;
  w.bytes(kLayerMagic, 4);
  w.u16(kLayerVersion);
  w.u32(static_cast<std::uint32_t>(n));
  w.u32(static_cast<std::uint32_t>(m));
  w.u32(static_cast<std::uint32_t>(r));
  w.u32(static_cast<std::uint32_t>(l));
  w.u32(static_cast<std::uint32_t>(layer.depth()));
  w.u8(static_cast<std::uint8_t>(real_width));
  for (int i = 0; i < 7; ++i) {
    w.u8(0);
  }
  for (const MdbfTerm& t : layer.terms) {
    write_packed(w, t.s_a);
    write_reals_colmajor(w, t.env_a.left, real_width);
    write_reals_colmajor(w, t.env_a.right, real_width);
    write_packed(w, t.s_b);
    write_reals_colmajor(w, t.env_b.left, real_width);
    write_reals_colmajor(w, t.env_b.right, real_width);
  }
  return w.take();
}

MdbfLayer read_layer(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  char magic[4];
  for (char& c : magic) {
    c = static_cast<char>(r.u8());
  }
  if (std::memcmp(magic, kLayerMagic, 4) != 0) {
    throw FormatError("bad layer magic", 0);
  }
  if (r.u16() != kLayerVersion) {
    throw FormatError("unsupported layer version", 4);
  }
  const Index n = r.u32();
  const Index m = r.u32();
  const Index rr = r.u32();
  const Index l = r.u32();
  const Index p = r.u32();
  if (n < 1 || m < 1 || rr < 1 || p < 1 || l < 1 ||
      l > std::min({n, m, rr})) {
    throw FormatError("invalid layer dimensions", 6);
  }
  const int real_width = r.u8();
  if (real_width != 16 && real_width != 32) {
    throw FormatError("invalid real width", 26);
  }
  for (int i = 0; i < 7; ++i) {
    if (r.u8() != 0) {
      throw FormatError("nonzero reserved byte", 27 + static_cast<std::size_t>(i));
    }
  }
  const std::size_t expected = layer_byte_size(n, m, rr, l, p, real_width);
  if (bytes.size() != expected) {
    throw FormatError("payload size does not match header (expected " +
                          std::to_string(expected) + " bytes, have " +
                          std::to_string(bytes.size()) + ")",
                      std::min(bytes.size(), expected));
  }

  MdbfLayer layer;
  layer.terms.reserve(static_cast<std::size_t>(p));
  for (Index k = 0; k < p; ++k) {
    MdbfTerm t;
    t.s_a = read_packed(r, n, rr);
    t.env_a.left = read_reals_colmajor(r, n, l, real_width);
    t.env_a.right = read_reals_colmajor(r, rr, l, real_width);
    t.s_b = read_packed(r, m, rr);
    t.env_b.left = read_reals_colmajor(r, m, l, real_width);
    t.env_b.right = read_reals_colmajor(r, rr, l, real_width);
    layer.terms.push_back(std::move(t));
  }
  return layer;
}

MdbfLayer quantize_layer(const MdbfLayer& layer, int real_width) {
  validate_width(real_width);
  MdbfLayer out = layer;
  for (std::size_t k = 0; k < out.terms.size(); ++k) {
    MdbfTerm& t = out.terms[k];
    check_storable(t.env_a.left, real_width, static_cast<Index>(k), "A");
    check_storable(t.env_a.right, real_width, static_cast<Index>(k), "Q");
    check_storable(t.env_b.left, real_width, static_cast<Index>(k), "B");
    check_storable(t.env_b.right, real_width, static_cast<Index>(k), "G");
    for (DenseMatrix* f :
         {&t.env_a.left, &t.env_a.right, &t.env_b.left, &t.env_b.right}) {
      for (Index i = 0; i < f->rows(); ++i) {
        for (Index j = 0; j < f->cols(); ++j) {
          (*f)(i, j) = quantize_scalar((*f)(i, j), real_width);
        }
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> write_dense(const DenseMatrix& m) {
  require_finite(m, "write_dense");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (std::abs(m(i, j)) >
          static_cast<double>(std::numeric_limits<float>::max())) {
        throw RangeError("write_dense: entry (" + std::to_string(i) + "," +
                         std::to_string(j) + ") exceeds the 32-bit range");
      }
    }
  }
  ByteWriter w;
  w.bytes(kDenseMagic, 4);
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      w.f32(static_cast<float>(m(i, j)));
    }
  }
  return w.take();
}

DenseMatrix read_dense(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  char magic[4];
  for (char& c : magic) {
    c = static_cast<char>(r.u8());
  }
  if (std::memcmp(magic, kDenseMagic, 4) != 0) {
    throw FormatError("bad tensor magic", 0);
  }
  const Index rows = r.u32();
  const Index cols = r.u32();
  if (rows < 1 || cols < 1) {
    throw FormatError("invalid tensor dimensions", 4);
  }
  const std::size_t expected =
      12 + 4 * static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (bytes.size() != expected) {
    throw FormatError("payload size does not match header (expected " +
                          std::to_string(expected) + " bytes, have " +
                          std::to_string(bytes.size()) + ")",
                      std::min(bytes.size(), expected));
  }
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const std::size_t at = r.offset();
      const double v = static_cast<double>(r.f32());
      if (!std::isfinite(v)) {
        throw FormatError("non-finite tensor entry", at);
      }
      m(i, j) = v;
    }
  }
  return m;
}

void save_bytes(const std::string& path,
                const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot open '" + path + "' for writing", 0);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw FormatError("short write to '" + path + "'", 0);
  }
}

std::vector<std::uint8_t> load_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw FormatError("cannot open '" + path + "'", 0);
  }
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()), size);
  }
  if (!in) {
    throw FormatError("short read from '" + path + "'", 0);
  }
  return bytes;
}

void save_layer(const std::string& path, const MdbfLayer& layer,
                int real_width) {
  save_bytes(path, write_layer(layer, real_width));
}

MdbfLayer load_layer(const std::string& path) {
  return read_layer(load_bytes(path));
}

void save_dense(const std::string& path, const DenseMatrix& m) {
  save_bytes(path, write_dense(m));
}

DenseMatrix load_dense(const std::string& path) {
  return read_dense(load_bytes(path));
}

}  // namespace mdbf

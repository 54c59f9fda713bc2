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

#ifndef MDBF_CONTAINER_HPP_
#define MDBF_CONTAINER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mdbf/factorizer.hpp"

namespace mdbf {

/// Largest finite IEEE binary16 value.
constexpr double kHalfMax = 65504.0;

/// double -> IEEE binary16, round to nearest even. Values beyond the
/// binary16 range map to +-infinity; callers that must stay finite check
/// against kHalfMax first.
std::uint16_t half_from_double(double x);
double half_to_double(std::uint16_t h);

/// Serialized layer ("MDBF"): 34-byte header (magic, version u16=1,
/// n/m/r/l/p u32, real_width u8, 7 reserved zero bytes), then p term
/// blocks of packed S_a words (little-endian u64, rows padded to whole
/// words), A, Q (column-major reals at real_width), packed S_b, B, G.
/// All terms must share (n, m, r, l). real_width is 16 or 32.
std::vector<std::uint8_t> write_layer(const MdbfLayer& layer, int real_width);
MdbfLayer read_layer(const std::vector<std::uint8_t>& bytes);

/// In-memory equivalent of one write/read cycle at the given width:
/// every real factor entry is rounded to the storage precision.
MdbfLayer quantize_layer(const MdbfLayer& layer, int real_width);

/// Serialized dense matrix ("RTF1"): magic, rows u32, cols u32, then
/// row-major little-endian 32-bit IEEE reals.
std::vector<std::uint8_t> write_dense(const DenseMatrix& m);
DenseMatrix read_dense(const std::vector<std::uint8_t>& bytes);

/// File helpers. Load failures and short writes raise FormatError.
void save_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> load_bytes(const std::string& path);
void save_layer(const std::string& path, const MdbfLayer& layer, int real_width);
MdbfLayer load_layer(const std::string& path);
void save_dense(const std::string& path, const DenseMatrix& m);
DenseMatrix load_dense(const std::string& path);

}  // namespace mdbf

#endif  // MDBF_CONTAINER_HPP_

// dcae/io.h

// Copyright 2026  The dcae authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef DCAE_IO_H_
#define DCAE_IO_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "dcae/common.h"

namespace dcae {

// CRC-32 (IEEE polynomial, reflected), as used by zip/png.
uint32_t crc32(std::string_view bytes);

// Little-endian encoder into an in-memory buffer.  File payloads are built
// here first so the trailing checksum covers exactly the payload bytes.
class ByteWriter {
 public:
  void put_u8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void put_u32(uint32_t v);
  void put_u64(uint64_t v);
  void put_f32(float v);
  void put_f64(double v);
  void put_bytes(std::string_view s) { out_.append(s); }

  const std::string &bytes() const { return out_; }

 private:
  std::string out_;
};

// Bounds-checked little-endian decoder; throws DataError on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  uint8_t get_u8();
  uint32_t get_u32();
  uint64_t get_u64();
  float get_f32();
  double get_f64();
  std::string_view get_bytes(size_t n);

  size_t pos() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(size_t n) const {
    if (pos_ + n > bytes_.size())
      throw DataError("truncated payload (need " + std::to_string(n) +
                      " bytes at offset " + std::to_string(pos_) + ")");
  }
  std::string_view bytes_;
  size_t pos_ = 0;
};

std::string read_file_bytes(const std::string &path);
void write_file_bytes(const std::string &path, std::string_view bytes);

// "%.17g" so every double round-trips through text.
std::string format_double(double v);

}  // namespace dcae

#endif  // DCAE_IO_H_

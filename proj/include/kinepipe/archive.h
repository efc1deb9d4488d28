// Copyright 2026 The Kinepipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KINEPIPE_ARCHIVE_H_
#define KINEPIPE_ARCHIVE_H_

// KIA1 intermediate array archive.
//
// Layout (all integers little-endian):
//   "KIA1"                      4 bytes magic
//   u32 array_count
//   per array:
//     u16 name_length, name bytes (UTF-8, no terminator)
//     u8  dtype (0 = f32, 1 = f64, 2 = u32)
//     u8  rank
//     u64 dims[rank]
//     payload: prod(dims) elements, little-endian
//     u32 CRC-32 (ISO-HDLC, as in zlib) of the payload bytes

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kinepipe/error.h"
#include "kinepipe/filesystem.h"

namespace kinepipe {

enum class DType : std::uint8_t { kF32 = 0, kF64 = 1, kU32 = 2 };

struct NamedArray {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::variant<std::vector<float>, std::vector<double>,
               std::vector<std::uint32_t>>
      data;

  DType dtype() const { return static_cast<DType>(data.index()); }
  std::uint64_t element_count() const;

  bool operator==(const NamedArray&) const = default;
};

using ArrayArchive = std::vector<NamedArray>;

class ArchiveError : public IoError {
 public:
  enum class Kind { kMagic, kTruncated, kChecksum, kFormat };
  ArchiveError(Kind kind, const std::string& what)
      : IoError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::vector<std::uint8_t> EncodeArchive(const ArrayArchive& arrays);
ArrayArchive DecodeArchive(std::span<const std::uint8_t> bytes);

void WriteIntermediate(FileSystem& fs, const std::filesystem::path& path,
                       const ArrayArchive& arrays);
ArrayArchive ReadIntermediate(FileSystem& fs, const std::filesystem::path& path);

// Looks up an array by name and type; throws ArchiveError when absent.
const NamedArray& FindArray(const ArrayArchive& arrays, const std::string& name);

template <typename T>
const std::vector<T>& ArrayData(const NamedArray& array) {
  if (const auto* v = std::get_if<std::vector<T>>(&array.data)) return *v;
  throw ArchiveError(ArchiveError::Kind::kFormat,
                     "array '" + array.name + "' has an unexpected dtype");
}

}  // namespace kinepipe

#endif  // KINEPIPE_ARCHIVE_H_

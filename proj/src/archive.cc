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

#include "kinepipe/archive.h"

#include <bit>
#include <cstring>
#include <limits>
#include <type_traits>

#include <zlib.h>

namespace kinepipe {
namespace {

constexpr char kMagic[4] = {'K', 'I', 'A', '1'};

std::uint32_t Crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in chunks.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t chunk =
        std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, bytes.data() + offset, static_cast<uInt>(chunk));
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

class Writer {
 public:
  template <typename T>
  void PutLe(T value) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
  }
  void PutBytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  std::size_t size() const { return out_.size(); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T GetLe(const char* what) {
    Require(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> GetBytes(std::size_t n, const char* what) {
    Require(n, what);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Require(std::size_t n, const char* what) {
    if (n > remaining()) {
      throw ArchiveError(ArchiveError::Kind::kTruncated,
                         std::string("truncated archive while reading ") + what);
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
using UintOf = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;

template <typename T>
void EncodePayload(const std::vector<T>& values, Writer& w) {
  const std::size_t begin = w.size();
  if constexpr (std::endian::native == std::endian::little) {
    w.PutBytes(values.data(), values.size() * sizeof(T));
  } else {
    for (T v : values) w.PutLe(std::bit_cast<UintOf<T>>(v));
  }
  std::span<const std::uint8_t> payload(w.bytes().data() + begin,
                                        w.size() - begin);
  w.PutLe<std::uint32_t>(Crc32(payload));
}

template <typename T>
std::vector<T> DecodePayload(std::span<const std::uint8_t> payload) {
  std::vector<T> values(payload.size() / sizeof(T));
  if constexpr (std::endian::native == std::endian::little) {
    if (!values.empty()) std::memcpy(values.data(), payload.data(), payload.size());
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      UintOf<T> bits = 0;
      for (std::size_t b = 0; b < sizeof(T); ++b) {
        bits |= static_cast<UintOf<T>>(payload[i * sizeof(T) + b]) << (8 * b);
      }
      values[i] = std::bit_cast<T>(bits);
    }
  }
  return values;
}

std::size_t ElementSize(DType dtype) {
  return dtype == DType::kF64 ? 8 : 4;
}

}  // namespace

std::uint64_t NamedArray::element_count() const {
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> EncodeArchive(const ArrayArchive& arrays) {
  if (arrays.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ArchiveError(ArchiveError::Kind::kFormat, "too many arrays");
  }
  Writer w;
  w.PutBytes(kMagic, sizeof(kMagic));
  w.PutLe<std::uint32_t>(static_cast<std::uint32_t>(arrays.size()));
  for (const NamedArray& a : arrays) {
    if (a.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ArchiveError(ArchiveError::Kind::kFormat,
                         "array name longer than 65535 bytes");
    }
    if (a.dims.size() > std::numeric_limits<std::uint8_t>::max()) {
      throw ArchiveError(ArchiveError::Kind::kFormat,
                         "array '" + a.name + "' has rank above 255");
    }
    const std::size_t count =
        std::visit([](const auto& v) { return v.size(); }, a.data);
    if (a.element_count() != count) {
      throw ArchiveError(ArchiveError::Kind::kFormat,
                         "array '" + a.name +
                             "' dims do not match its element count");
    }
    w.PutLe<std::uint16_t>(static_cast<std::uint16_t>(a.name.size()));
    w.PutBytes(a.name.data(), a.name.size());
    w.PutLe<std::uint8_t>(static_cast<std::uint8_t>(a.dtype()));
    w.PutLe<std::uint8_t>(static_cast<std::uint8_t>(a.dims.size()));
    for (std::uint64_t d : a.dims) w.PutLe<std::uint64_t>(d);
    std::visit([&w](const auto& v) { EncodePayload(v, w); }, a.data);
  }
  return std::move(w.bytes());
}

ArrayArchive DecodeArchive(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic)) {
    throw ArchiveError(ArchiveError::Kind::kTruncated,
                       "truncated archive while reading magic");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ArchiveError(ArchiveError::Kind::kMagic, "not a KIA1 archive");
  }
  Reader r(bytes.subspan(sizeof(kMagic)));
  const auto count = r.GetLe<std::uint32_t>("array count");
  ArrayArchive arrays;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    const auto name_len = r.GetLe<std::uint16_t>("name length");
    auto name = r.GetBytes(name_len, "name");
    a.name.assign(name.begin(), name.end());
    const auto tag = r.GetLe<std::uint8_t>("dtype");
    if (tag > 2) {
      throw ArchiveError(ArchiveError::Kind::kFormat,
                         "array '" + a.name + "' has unknown dtype tag " +
                             std::to_string(tag));
    }
    const auto dtype = static_cast<DType>(tag);
    const auto rank = r.GetLe<std::uint8_t>("rank");
    a.dims.resize(rank);
    // Guard the byte count against overflow before trusting it.
    unsigned __int128 n_bytes = ElementSize(dtype);
    for (auto& d : a.dims) {
      d = r.GetLe<std::uint64_t>("dims");
      n_bytes *= d;
      if (n_bytes > r.remaining()) n_bytes = r.remaining() + 1;
    }
    if (n_bytes > r.remaining()) {
      throw ArchiveError(ArchiveError::Kind::kTruncated,
                         "truncated payload in array '" + a.name + "'");
    }
    auto payload = r.GetBytes(static_cast<std::size_t>(n_bytes), "payload");
    const auto stored_crc = r.GetLe<std::uint32_t>("checksum");
    if (stored_crc != Crc32(payload)) {
      throw ArchiveError(ArchiveError::Kind::kChecksum,
                         "checksum mismatch in array '" + a.name + "'");
    }
    switch (dtype) {
      case DType::kF32:
        a.data = DecodePayload<float>(payload);
        break;
      case DType::kF64:
        a.data = DecodePayload<double>(payload);
        break;
      case DType::kU32:
        a.data = DecodePayload<std::uint32_t>(payload);
        break;
    }
    arrays.push_back(std::move(a));
  }
  if (r.remaining() != 0) {
    throw ArchiveError(ArchiveError::Kind::kFormat,
                       "trailing bytes after last array");
  }
  return arrays;
}

void WriteIntermediate(FileSystem& fs, const std::filesystem::path& path,
                       const ArrayArchive& arrays) {
  const auto bytes = EncodeArchive(arrays);
  fs.WriteFile(path, bytes);
}

ArrayArchive ReadIntermediate(FileSystem& fs,
                              const std::filesystem::path& path) {
  const auto bytes = fs.ReadFile(path);
  try {
    return DecodeArchive(bytes);
  } catch (const ArchiveError& e) {
    throw ArchiveError(e.kind(), path.string() + ": " + e.what());
  }
}

const NamedArray& FindArray(const ArrayArchive& arrays,
                            const std::string& name) {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw ArchiveError(ArchiveError::Kind::kFormat,
                     "archive has no array named '" + name + "'");
}

}  // namespace kinepipe

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

#ifndef KINEPIPE_FILESYSTEM_H_
#define KINEPIPE_FILESYSTEM_H_

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace kinepipe {

// Minimal file access used by the pipeline, injectable so tests can observe
// every write.
class FileSystem {
 public:
  virtual ~FileSystem() = default;
  virtual void WriteFile(const std::filesystem::path& path,
                         std::span<const std::uint8_t> bytes) = 0;
  virtual std::vector<std::uint8_t> ReadFile(
      const std::filesystem::path& path) = 0;
  virtual void CreateDirectories(const std::filesystem::path& path) = 0;
};

class LocalFileSystem : public FileSystem {
 public:
  void WriteFile(const std::filesystem::path& path,
                 std::span<const std::uint8_t> bytes) override;
  std::vector<std::uint8_t> ReadFile(const std::filesystem::path& path) override;
  void CreateDirectories(const std::filesystem::path& path) override;
};

// Forwards to another file system and records every operation.
class RecordingFileSystem : public FileSystem {
 public:
  explicit RecordingFileSystem(FileSystem& inner) : inner_(inner) {}

  void WriteFile(const std::filesystem::path& path,
                 std::span<const std::uint8_t> bytes) override;
  std::vector<std::uint8_t> ReadFile(const std::filesystem::path& path) override;
  void CreateDirectories(const std::filesystem::path& path) override;

  int writes() const;
  int reads() const;
  int directory_creations() const;
  std::vector<std::filesystem::path> written_paths() const;

 private:
  FileSystem& inner_;
  mutable std::mutex mu_;
  std::vector<std::filesystem::path> written_;
  int reads_ = 0;
  int mkdirs_ = 0;
};

LocalFileSystem& DefaultFileSystem();

}  // namespace kinepipe

#endif  // KINEPIPE_FILESYSTEM_H_

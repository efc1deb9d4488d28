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

#include "kinepipe/filesystem.h"

#include <fstream>
#include <iterator>
#include <system_error>

#include "kinepipe/error.h"

namespace kinepipe {

void LocalFileSystem::WriteFile(const std::filesystem::path& path,
                                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<std::uint8_t> LocalFileSystem::ReadFile(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return bytes;
}

void LocalFileSystem::CreateDirectories(const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) {
    throw IoError("cannot create directory '" + path.string() + "': " +
                  ec.message());
  }
}

void RecordingFileSystem::WriteFile(const std::filesystem::path& path,
                                    std::span<const std::uint8_t> bytes) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    written_.push_back(path);
  }
  inner_.WriteFile(path, bytes);
}

std::vector<std::uint8_t> RecordingFileSystem::ReadFile(
    const std::filesystem::path& path) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++reads_;
  }
  return inner_.ReadFile(path);
}

void RecordingFileSystem::CreateDirectories(const std::filesystem::path& path) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++mkdirs_;
  }
  inner_.CreateDirectories(path);
}

int RecordingFileSystem::writes() const {
  std::lock_guard<std::mutex> lock(mu_);
  return static_cast<int>(written_.size());
}

int RecordingFileSystem::reads() const {
  std::lock_guard<std::mutex> lock(mu_);
  return reads_;
}

int RecordingFileSystem::directory_creations() const {
  std::lock_guard<std::mutex> lock(mu_);
  return mkdirs_;
}

std::vector<std::filesystem::path> RecordingFileSystem::written_paths() const {
  std::lock_guard<std::mutex> lock(mu_);
  return written_;
}

LocalFileSystem& DefaultFileSystem() {
  static LocalFileSystem fs;
  return fs;
}

}  // namespace kinepipe

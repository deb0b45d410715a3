// Copyright 2026 The JointSLT Authors. All Rights Reserved.
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

#ifndef SLT_HARNESS_MANIFEST_H_
#define SLT_HARNESS_MANIFEST_H_

#include <string>
#include <vector>

#include "json.hpp"

namespace slt {

struct ManifestRecord {
  std::string id;
  std::string talk;
  std::string split;
  std::string audio;  // relative to the manifest's directory unless absolute
  std::string transcript;
  std::string translation;
  bool operator==(const ManifestRecord&) const = default;
};

struct Manifest {
  std::string base_dir;
  std::vector<ManifestRecord> records;

  std::string ResolvePath(const ManifestRecord& record) const;
  std::vector<const ManifestRecord*> Split(const std::string& split) const;
  // Duplicate ids, missing fields or unreadable audio raise Error.
  void Validate() const;
};

// Tab-separated with a header line:
//   id  talk  split  audio  transcript  translation
void WriteManifest(const std::string& path, const Manifest& manifest);
Manifest ReadManifest(const std::string& path);

// FNV-1a of the manifest file plus every referenced audio file.
std::uint64_t HashDataset(const Manifest& manifest);

// Records of files produced inside a run directory, kept in
// <run_dir>/artifacts.json as {"files": [{"path", "command", "bytes"}]}.
void RecordArtifacts(const std::string& run_dir, const std::string& command,
                     const std::vector<std::string>& paths);
nlohmann::json ReadArtifacts(const std::string& run_dir);

// Reads a whole file as bytes.
std::string ReadFileBytes(const std::string& path);

}  // namespace slt

#endif  // SLT_HARNESS_MANIFEST_H_

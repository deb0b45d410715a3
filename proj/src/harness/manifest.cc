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

#include "slt/harness/manifest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "slt/error.h"

namespace slt {
namespace fs = std::filesystem;

namespace {

constexpr const char* kHeader = "id\ttalk\tsplit\taudio\ttranscript\ttranslation";

std::uint64_t Fnv(std::uint64_t h, const std::string& bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Manifest::ResolvePath(const ManifestRecord& record) const {
  const fs::path p(record.audio);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (fs::path(base_dir) / p).string();
}

std::vector<const ManifestRecord*> Manifest::Split(const std::string& split) const {
  std::vector<const ManifestRecord*> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(&r);
  return out;
}

void Manifest::Validate() const {
  std::set<std::string> seen;
  std::vector<std::string> missing;
  for (const auto& r : records) {
    if (r.id.empty() || r.talk.empty() || r.split.empty() || r.audio.empty())
      throw Error("manifest record '" + r.id + "' has an empty field");
    if (!seen.insert(r.id).second) throw Error("duplicate utterance id '" + r.id + "'");
    if (!fs::is_regular_file(ResolvePath(r))) missing.push_back(ResolvePath(r));
  }
  if (!missing.empty()) {
    std::string msg = "manifest references missing files:";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
    if (missing.size() > 10) msg += " ...";
    throw Error(msg);
  }
}

void WriteManifest(const std::string& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path);
  out << kHeader << '\n';
  for (const auto& r : manifest.records) {
    for (const std::string* f : {&r.id, &r.talk, &r.split, &r.audio, &r.transcript, &r.translation})
      if (f->find_first_of("\t\n") != std::string::npos)
        throw Error("manifest fields may not contain tabs or newlines");
    out << r.id << '\t' << r.talk << '\t' << r.split << '\t' << r.audio << '\t' << r.transcript
        << '\t' << r.translation << '\n';
  }
}

Manifest ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read manifest " + path);
  Manifest m;
  m.base_dir = fs::path(path).parent_path().string();
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw Error(path + ": missing manifest header");
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != 6) throw Error(path + ":" + std::to_string(number) + ": expected 6 fields");
    m.records.push_back({f[0], f[1], f[2], f[3], f[4], f[5]});
  }
  return m;
}

std::uint64_t HashDataset(const Manifest& manifest) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& r : manifest.records) {
    h = Fnv(h, r.id + '\t' + r.talk + '\t' + r.split + '\t' + r.audio + '\t' + r.transcript +
                   '\t' + r.translation + '\n');
    h = Fnv(h, ReadFileBytes(manifest.ResolvePath(r)));
  }
  return h;
}

nlohmann::json ReadArtifacts(const std::string& run_dir) {
  const fs::path p = fs::path(run_dir) / "artifacts.json";
  if (!fs::exists(p)) return {{"files", nlohmann::json::array()}};
  return nlohmann::json::parse(ReadFileBytes(p.string()));
}

void RecordArtifacts(const std::string& run_dir, const std::string& command,
                     const std::vector<std::string>& paths) {
  nlohmann::json doc = ReadArtifacts(run_dir);
  auto& files = doc["files"];
  const fs::path root = fs::absolute(run_dir).lexically_normal();
  for (const auto& path : paths) {
    std::string rel = fs::absolute(path).lexically_normal().lexically_relative(root).string();
    if (rel.empty() || rel.rfind("..", 0) == 0) rel = fs::absolute(path).string();
    std::uintmax_t bytes = 0;
    if (fs::is_directory(path)) {
      for (const auto& f : fs::recursive_directory_iterator(path))
        if (f.is_regular_file()) bytes += f.file_size();
    } else if (fs::exists(path)) {
      bytes = fs::file_size(path);
    }
    nlohmann::json entry = {{"path", rel}, {"command", command}, {"bytes", bytes}};
    auto it = std::find_if(files.begin(), files.end(),
                           [&](const nlohmann::json& f) { return f["path"] == rel; });
    if (it != files.end()) *it = entry;
    else files.push_back(entry);
  }
  std::sort(files.begin(), files.end(),
            [](const nlohmann::json& a, const nlohmann::json& b) { return a["path"] < b["path"]; });
  std::ofstream out(fs::path(run_dir) / "artifacts.json");
  if (!out) throw Error("cannot write artifact list in " + run_dir);
  out << doc.dump(2) << '\n';
}

}  // namespace slt

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

#ifndef SLT_TEXT_SUBWORD_H_
#define SLT_TEXT_SUBWORD_H_

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace slt {

enum class Granularity { kCharacter, kBpe };

std::string GranularityName(Granularity g);
Granularity ParseGranularity(const std::string& name);

// Reserved ids shared by every vocabulary.
inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kNumSpecials = 4;

inline constexpr const char* kEndOfWord = "</w>";
inline constexpr const char* kSpaceSymbol = "<space>";
inline constexpr const char* kUnkRendering = "\u2047";

struct TokenSequence {
  std::vector<int> ids;
  Granularity granularity = Granularity::kBpe;

  bool operator==(const TokenSequence&) const = default;
};

// Lower-cases ASCII letters, removes the punctuation set .,;:!?"'()[]- and
// collapses runs of whitespace to one space with no leading/trailing space.
// Non-ASCII bytes pass through unchanged.
std::string NormalizeText(const std::string& raw);

// Splits a UTF-8 string into code-point strings.
std::vector<std::string> Utf8Characters(const std::string& text);

std::vector<std::string> SplitWords(const std::string& text);

// Character or byte-pair-encoding vocabulary. Immutable once built; encode
// and decode are safe to call concurrently.
class SubwordModel {
 public:
  // Character vocabulary over the symbols seen in `corpus`, plus <space>.
  static SubwordModel LearnCharacters(const std::vector<std::string>& corpus);

  // Greedy pair merging inside words (word-final symbols carry "</w>").
  // Each round merges the most frequent adjacent pair, ties broken by the
  // lexicographically smallest pair, until the vocabulary reaches
  // `target_vocab` or no pair occurs at least twice.
  static SubwordModel LearnBpe(const std::vector<std::string>& corpus,
                               int target_vocab);

  Granularity mode() const { return mode_; }
  int vocab_size() const { return static_cast<int>(symbols_.size()); }
  const std::vector<std::pair<std::string, std::string>>& merges() const {
    return merges_;
  }
  const std::string& symbol(int id) const;
  // Returns kUnkId for unknown symbols.
  int id(const std::string& symbol) const;
  bool contains(const std::string& symbol) const {
    return ids_.count(symbol) != 0;
  }

  // Symbol strings for normalized text (no bos/eos).
  std::vector<std::string> Segment(const std::string& text) const;
  TokenSequence Encode(const std::string& text) const;
  // Drops pad/bos/eos, renders unk as "⁇", turns "</w>" and <space> into
  // word boundaries. Throws on out-of-range ids.
  std::string Decode(const std::vector<int>& ids) const;
  std::string Decode(const TokenSequence& tokens) const { return Decode(tokens.ids); }

  void Save(std::ostream& out) const;
  static SubwordModel Load(std::istream& in);
  void SaveFile(const std::string& path) const;
  static SubwordModel LoadFile(const std::string& path);

  // FNV-1a over the serialized form; stored in checkpoints.
  std::uint64_t Hash() const;

  bool operator==(const SubwordModel& other) const {
    return mode_ == other.mode_ && merges_ == other.merges_ &&
           symbols_ == other.symbols_;
  }

 private:
  SubwordModel() = default;
  void AddSymbol(const std::string& symbol);
  std::vector<std::string> SegmentWord(const std::string& word) const;

  Granularity mode_ = Granularity::kBpe;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace slt

#endif  // SLT_TEXT_SUBWORD_H_

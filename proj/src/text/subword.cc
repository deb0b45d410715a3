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

#include "slt/text/subword.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "slt/error.h"

namespace slt {
namespace {

constexpr std::string_view kPunctuation = ".,;:!?\"'()[]-";
constexpr const char* kSpecialSymbols[kNumSpecials] = {"<pad>", "<s>", "</s>",
                                                       "<unk>"};
constexpr const char* kFileMagic = "#slt-subword v1";

bool EndsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string GranularityName(Granularity g) {
  return g == Granularity::kCharacter ? "character" : "bpe";
}

Granularity ParseGranularity(const std::string& name) {
  if (name == "character" || name == "char") return Granularity::kCharacter;
  if (name == "bpe") return Granularity::kBpe;
  throw Error("unknown granularity '" + name + "' (expected character or bpe)");
}

std::string NormalizeText(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (kPunctuation.find(static_cast<char>(c)) != std::string_view::npos) continue;
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c < 128 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  return out;
}

std::vector<std::string> Utf8Characters(const std::string& text) {
  std::vector<std::string> chars;
  for (std::size_t i = 0; i < text.size();) {
    const unsigned char lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    len = std::min(len, text.size() - i);
    chars.push_back(text.substr(i, len));
    i += len;
  }
  return chars;
}

std::vector<std::string> SplitWords(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string word;
  while (in >> word) words.push_back(word);
  return words;
}

void SubwordModel::AddSymbol(const std::string& symbol) {
  if (ids_.count(symbol)) return;
  ids_.emplace(symbol, static_cast<int>(symbols_.size()));
  symbols_.push_back(symbol);
}

SubwordModel SubwordModel::LearnCharacters(const std::vector<std::string>& corpus) {
  SubwordModel model;
  model.mode_ = Granularity::kCharacter;
  for (const char* s : kSpecialSymbols) model.AddSymbol(s);
  model.AddSymbol(kSpaceSymbol);
  std::set<std::string> chars;
  for (const auto& line : corpus)
    for (const auto& c : Utf8Characters(line))
      if (c != " ") chars.insert(c);
  for (const auto& c : chars) model.AddSymbol(c);
  return model;
}

SubwordModel SubwordModel::LearnBpe(const std::vector<std::string>& corpus,
                                    int target_vocab) {
  if (corpus.empty()) throw Error("learn_bpe: empty corpus");
  std::map<std::string, int> word_counts;
  for (const auto& line : corpus)
    for (const auto& w : SplitWords(line)) ++word_counts[w];

  // Word segmentations with their corpus frequency.
  std::vector<std::pair<std::vector<std::string>, int>> words;
  std::set<std::string> initial;
  for (const auto& [word, count] : word_counts) {
    std::vector<std::string> symbols = Utf8Characters(word);
    symbols.back() += kEndOfWord;
    for (const auto& s : symbols) initial.insert(s);
    words.emplace_back(std::move(symbols), count);
  }
  const int floor = kNumSpecials + static_cast<int>(initial.size());
  if (target_vocab <= floor) {
    throw Error("learn_bpe: target vocabulary " + std::to_string(target_vocab) +
                " must exceed the character floor of " + std::to_string(floor) +
                " (" + std::to_string(initial.size()) + " symbols + " +
                std::to_string(kNumSpecials) + " specials)");
  }

  SubwordModel model;
  model.mode_ = Granularity::kBpe;
  for (const char* s : kSpecialSymbols) model.AddSymbol(s);
  for (const auto& s : initial) model.AddSymbol(s);

  while (model.vocab_size() < target_vocab) {
    std::map<std::pair<std::string, std::string>, int> pair_counts;
    for (const auto& [symbols, count] : words)
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
        pair_counts[{symbols[i], symbols[i + 1]}] += count;
    // std::map iterates pairs in lexicographic order, so the first maximum
    // found is the lexicographically smallest among ties.
    const std::pair<std::string, std::string>* best = nullptr;
    int best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count) {
        best = &pair;
        best_count = count;
      }
    }
    if (best == nullptr || best_count < 2) break;
    const auto merge = *best;
    const std::string merged = merge.first + merge.second;
    for (auto& [symbols, count] : words) {
      std::vector<std::string> next;
      next.reserve(symbols.size());
      for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i + 1 < symbols.size() && symbols[i] == merge.first &&
            symbols[i + 1] == merge.second) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(symbols[i]);
        }
      }
      symbols = std::move(next);
    }
    model.merges_.push_back(merge);
    model.AddSymbol(merged);
  }
  return model;
}

const std::string& SubwordModel::symbol(int id) const {
  if (id < 0 || id >= vocab_size()) {
    throw Error("token id " + std::to_string(id) + " outside vocabulary of " +
                std::to_string(vocab_size()));
  }
  return symbols_[id];
}

int SubwordModel::id(const std::string& symbol) const {
  auto it = ids_.find(symbol);
  return it == ids_.end() ? kUnkId : it->second;
}

std::vector<std::string> SubwordModel::SegmentWord(const std::string& word) const {
  std::vector<std::string> symbols = Utf8Characters(word);
  symbols.back() += kEndOfWord;
  for (const auto& [left, right] : merges_) {
    if (symbols.size() < 2) break;
    std::vector<std::string> next;
    next.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
        next.push_back(left + right);
        ++i;
      } else {
        next.push_back(symbols[i]);
      }
    }
    symbols = std::move(next);
  }
  return symbols;
}

std::vector<std::string> SubwordModel::Segment(const std::string& text) const {
  std::vector<std::string> out;
  if (mode_ == Granularity::kCharacter) {
    for (const auto& c : Utf8Characters(text))
      out.push_back(c == " " ? std::string(kSpaceSymbol) : c);
    return out;
  }
  for (const auto& word : SplitWords(text))
    for (auto& s : SegmentWord(word)) out.push_back(std::move(s));
  return out;
}

TokenSequence SubwordModel::Encode(const std::string& text) const {
  TokenSequence tokens;
  tokens.granularity = mode_;
  for (const auto& s : Segment(text)) tokens.ids.push_back(id(s));
  return tokens;
}

std::string SubwordModel::Decode(const std::vector<int>& ids) const {
  std::string text;
  for (int id : ids) {
    const std::string& s = symbol(id);
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    if (id == kUnkId) {
      text += kUnkRendering;
    } else if (mode_ == Granularity::kCharacter) {
      text += s == kSpaceSymbol ? std::string(" ") : s;
    } else if (EndsWith(s, kEndOfWord)) {
      text.append(s, 0, s.size() - std::string_view(kEndOfWord).size());
      text.push_back(' ');
    } else {
      text += s;
    }
  }
  // Collapse the boundary spaces introduced above.
  std::string out;
  for (char c : text) {
    if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
    out.push_back(c);
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

void SubwordModel::Save(std::ostream& out) const {
  out << kFileMagic << '\n';
  out << "mode\t" << GranularityName(mode_) << '\n';
  out << "vocab_size\t" << vocab_size() << '\n';
  out << "merges\t" << merges_.size() << '\n';
  for (const auto& [left, right] : merges_) out << left << '\t' << right << '\n';
  for (int i = 0; i < vocab_size(); ++i) out << symbols_[i] << '\t' << i << '\n';
}

SubwordModel SubwordModel::Load(std::istream& in) {
  auto fail = [](const std::string& what) {
    return Error("malformed subword model file: " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != kFileMagic) throw fail("bad header");
  auto field = [&](const std::string& key) {
    if (!std::getline(in, line)) throw fail("missing " + key);
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.substr(0, tab) != key) throw fail("expected " + key);
    return line.substr(tab + 1);
  };
  SubwordModel model;
  model.mode_ = ParseGranularity(field("mode"));
  const int vocab = std::stoi(field("vocab_size"));
  const int merges = std::stoi(field("merges"));
  for (int i = 0; i < merges; ++i) {
    if (!std::getline(in, line)) throw fail("truncated merge list");
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw fail("merge line without tab");
    model.merges_.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  for (int i = 0; i < vocab; ++i) {
    if (!std::getline(in, line)) throw fail("truncated vocabulary");
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw fail("vocabulary line without tab");
    if (std::stoi(line.substr(tab + 1)) != i) throw fail("non-dense vocabulary ids");
    model.AddSymbol(line.substr(0, tab));
  }
  if (model.vocab_size() != vocab) throw fail("duplicate vocabulary symbols");
  return model;
}

void SubwordModel::SaveFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  Save(out);
}

SubwordModel SubwordModel::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return Load(in);
}

std::uint64_t SubwordModel::Hash() const {
  std::ostringstream out;
  Save(out);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : out.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace slt

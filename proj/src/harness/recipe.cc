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

#include "slt/harness/recipe.h"

#include <algorithm>

#include "slt/error.h"
#include "slt/text/subword.h"

namespace slt {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

// "[A + B]" -> {"A", "B"}
std::vector<std::string> Members(const std::string& side, const std::string& whole) {
  const std::string t = Trim(side);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw Error("recipe '" + whole + "': each side must be bracketed");
  std::vector<std::string> out;
  std::size_t start = 1;
  while (true) {
    const auto plus = t.find('+', start);
    const std::string m = Trim(t.substr(start, (plus == std::string::npos ? t.size() - 1 : plus) - start));
    out.push_back(m);
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return out;
}

}  // namespace

std::string Recipe::Name() const {
  std::string asr = ext_asr && joint_asr ? "Ext-ASR + Joint-ASR" : ext_asr ? "Ext-ASR" : "Joint-ASR";
  std::string mt = ext_mt && joint_mt ? "Joint-MT + Ext-MT" : ext_mt ? "Ext-MT" : "Joint-MT";
  return "[" + asr + "]=>[" + mt + "]";
}

std::string Recipe::Slug() const {
  std::string asr = ext_asr && joint_asr ? "ext-asr+joint-asr" : ext_asr ? "ext-asr" : "joint-asr";
  std::string mt = ext_mt && joint_mt ? "joint-mt+ext-mt" : ext_mt ? "ext-mt" : "joint-mt";
  return asr + "__" + mt;
}

Recipe Recipe::Parse(const std::string& name) {
  std::string text = name;
  const std::string arrow = "⟹";
  if (auto p = text.find(arrow); p != std::string::npos) text.replace(p, arrow.size(), "=>");
  auto sep = text.find("=>");
  if (sep == std::string::npos) {
    // Slug form.
    sep = text.find("__");
    if (sep == std::string::npos) throw Error("recipe '" + name + "' has no '=>'");
    std::string asr = text.substr(0, sep), mt = text.substr(sep + 2);
    auto bracket = [](std::string s) {
      std::replace(s.begin(), s.end(), '+', ' ');
      std::string out = "[";
      std::size_t start = 0;
      bool first = true;
      while (start < s.size()) {
        auto space = s.find(' ', start);
        std::string m = s.substr(start, space == std::string::npos ? space : space - start);
        if (!m.empty()) {
          out += (first ? "" : " + ") + m;
          first = false;
        }
        if (space == std::string::npos) break;
        start = space + 1;
      }
      return out + "]";
    };
    text = bracket(asr) + "=>" + bracket(mt);
    sep = text.find("=>");
  }
  Recipe r;
  r.ext_asr = r.joint_asr = r.ext_mt = r.joint_mt = false;
  for (const std::string& m : Members(text.substr(0, sep), name)) {
    std::string lower = NormalizeText(m);
    if (lower == "extasr") r.ext_asr = true;
    else if (lower == "jointasr") r.joint_asr = true;
    else throw Error("recipe '" + name + "': unknown transcript model '" + m + "'");
  }
  for (const std::string& m : Members(text.substr(sep + 2), name)) {
    std::string lower = NormalizeText(m);
    if (lower == "extmt") r.ext_mt = true;
    else if (lower == "jointmt") r.joint_mt = true;
    else throw Error("recipe '" + name + "': unknown translation model '" + m + "'");
  }
  return r;
}

std::vector<Recipe> Recipe::All() {
  std::vector<Recipe> out;
  const std::pair<bool, bool> asr_sides[] = {{true, false}, {false, true}, {true, true}};
  const std::pair<bool, bool> mt_sides[] = {{true, false}, {false, true}, {true, true}};
  for (const auto& [ea, ja] : asr_sides)
    for (const auto& [em, jm] : mt_sides) out.push_back({ea, ja, em, jm});
  return out;
}

}  // namespace slt

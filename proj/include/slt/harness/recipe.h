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

#ifndef SLT_HARNESS_RECIPE_H_
#define SLT_HARNESS_RECIPE_H_

#include <string>
#include <vector>

namespace slt {

// One ensemble system: which transcript models feed which translation
// models. Ext-* models consume tokens; Joint-* are halves of the jointly
// trained model, and Joint-MT reads bridge states.
struct Recipe {
  bool ext_asr = true;
  bool joint_asr = false;
  bool ext_mt = true;
  bool joint_mt = false;

  // "[Ext-ASR]=>[Joint-MT + Ext-MT]" style names, in the member order the
  // result tables use.
  std::string Name() const;
  // Filesystem-friendly form, e.g. "ext-asr__joint-mt+ext-mt".
  std::string Slug() const;
  // Accepts "=>" or the double arrow, member order and spacing free.
  static Recipe Parse(const std::string& name);
  // The nine systems in table row order.
  static std::vector<Recipe> All();

  bool needs_ext_asr() const { return ext_asr; }
  bool needs_ext_mt() const { return ext_mt; }
  bool needs_joint() const { return joint_asr || joint_mt; }
  bool operator==(const Recipe&) const = default;
};

}  // namespace slt

#endif  // SLT_HARNESS_RECIPE_H_

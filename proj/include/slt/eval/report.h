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

#ifndef SLT_EVAL_REPORT_H_
#define SLT_EVAL_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace slt {

// A results table: row labels on the left, then one group of metric
// columns per evaluation split. Values print with two decimals; missing
// cells print blank.
struct ReportTable {
  std::string title;
  std::vector<std::string> label_headers;  // e.g. {"ASR-system"}
  std::vector<std::string> splits;         // e.g. {"dev-2010", "tst2010"}
  std::vector<std::string> metrics;        // per split, e.g. {"BLEU", "WER"}

  struct Row {
    std::vector<std::string> labels;
    std::vector<std::optional<double>> values;  // splits x metrics
    bool starts_group = false;                  // rule above this row
    bool operator==(const Row&) const = default;
  };
  std::vector<Row> rows;

  void AddRow(std::vector<std::string> labels, std::vector<std::optional<double>> values,
              bool starts_group = false);
  bool operator==(const ReportTable&) const = default;
};

// Aligned plain text:
//   == title ==
//   header line (label headers, split names)
//   metric line (only when a split has several metrics)
//   rule, rows (a rule before each group start), rule
std::string RenderTable(const ReportTable& table);

// Inverse of RenderTable. Values come back rounded to two decimals.
ReportTable ParseTable(const std::string& text);

// Machine-readable records: one object per (row, split, metric) cell.
nlohmann::json TableRecords(const ReportTable& table);

// Reference file: "talk_id<TAB>segment_id<TAB>text" per line.
struct ReferenceSegment {
  std::string talk;
  std::string segment;
  std::string text;
};

std::vector<ReferenceSegment> ReadReferences(const std::string& path);
void WriteReferences(const std::string& path, const std::vector<ReferenceSegment>& segments);

}  // namespace slt

#endif  // SLT_EVAL_REPORT_H_

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

#include "slt/eval/report.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "slt/error.h"

namespace slt {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(' ') - b + 1);
}

std::vector<std::string> SplitCells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto bar = line.find('|', start);
    cells.push_back(Trim(line.substr(start, bar == std::string::npos ? bar : bar - start)));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return cells;
}

std::string FormatValue(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

bool IsRule(const std::string& line) {
  return !line.empty() && line.find_first_not_of("-+") == std::string::npos;
}

std::string Pad(const std::string& s, std::size_t width, bool right) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

}  // namespace

void ReportTable::AddRow(std::vector<std::string> labels,
                         std::vector<std::optional<double>> values, bool starts_group) {
  if (labels.size() != label_headers.size()) throw Error("row label count mismatch");
  if (values.size() != splits.size() * metrics.size()) throw Error("row value count mismatch");
  rows.push_back({std::move(labels), std::move(values), starts_group});
}

std::string RenderTable(const ReportTable& t) {
  const std::size_t nl = t.label_headers.size(), ns = t.splits.size(), nm = t.metrics.size();
  if (nl == 0 || ns == 0 || nm == 0) throw Error("table needs labels, splits and metrics");
  for (const auto& s : t.splits)
    if (s.find('|') != std::string::npos) throw Error("split names may not contain '|'");

  std::vector<std::size_t> label_w(nl), value_w(ns * nm);
  for (std::size_t i = 0; i < nl; ++i) label_w[i] = t.label_headers[i].size();
  for (std::size_t c = 0; c < ns * nm; ++c) value_w[c] = t.metrics[c % nm].size();
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < nl; ++i) label_w[i] = std::max(label_w[i], row.labels[i].size());
    for (std::size_t c = 0; c < ns * nm; ++c)
      value_w[c] = std::max(value_w[c], FormatValue(row.values[c]).size());
  }
  // A split's name spans its metric columns; widen the last one if needed.
  for (std::size_t s = 0; s < ns; ++s) {
    std::size_t span = 3 * (nm - 1);
    for (std::size_t m = 0; m < nm; ++m) span += value_w[s * nm + m];
    if (t.splits[s].size() > span) value_w[s * nm + nm - 1] += t.splits[s].size() - span;
  }

  auto join = [](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? " | " : "") + cells[i];
    return line;
  };
  std::vector<std::string> header, metric_line;
  for (std::size_t i = 0; i < nl; ++i) {
    header.push_back(Pad(t.label_headers[i], label_w[i], false));
    metric_line.push_back(std::string(label_w[i], ' '));
  }
  for (std::size_t s = 0; s < ns; ++s) {
    std::size_t span = 3 * (nm - 1);
    for (std::size_t m = 0; m < nm; ++m) {
      span += value_w[s * nm + m];
      metric_line.push_back(Pad(t.metrics[m], value_w[s * nm + m], true));
    }
    header.push_back(Pad(t.splits[s], span, true));
  }
  const std::string head = join(header);
  const std::string rule(head.size(), '-');
  std::ostringstream out;
  out << "== " << t.title << " ==\n" << head << '\n' << join(metric_line) << '\n' << rule << '\n';
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.starts_group && r > 0) out << rule << '\n';
    std::vector<std::string> cells;
    for (std::size_t i = 0; i < nl; ++i) cells.push_back(Pad(row.labels[i], label_w[i], false));
    for (std::size_t c = 0; c < ns * nm; ++c)
      cells.push_back(Pad(FormatValue(row.values[c]), value_w[c], true));
    std::string line = join(cells);
    out << line.substr(0, line.find_last_not_of(' ') + 1) << '\n';
  }
  out << rule << '\n';
  return out.str();
}

ReportTable ParseTable(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ReportTable t;
  if (!std::getline(in, line) || line.rfind("== ", 0) != 0 || line.size() < 6 ||
      line.substr(line.size() - 3) != " ==")
    throw Error("table must start with a '== title ==' line");
  t.title = line.substr(3, line.size() - 6);
  std::string header_line, metric_text;
  if (!std::getline(in, header_line) || !std::getline(in, metric_text))
    throw Error("table is missing its header");
  const auto header = SplitCells(header_line);
  const auto metric_cells = SplitCells(metric_text);
  std::size_t nl = 0;
  while (nl < metric_cells.size() && metric_cells[nl].empty()) ++nl;
  const std::size_t ns = header.size() - nl;
  if (nl == 0 || ns == 0 || (metric_cells.size() - nl) % ns != 0)
    throw Error("table header is malformed");
  const std::size_t nm = (metric_cells.size() - nl) / ns;
  t.label_headers.assign(header.begin(), header.begin() + nl);
  t.splits.assign(header.begin() + nl, header.end());
  t.metrics.assign(metric_cells.begin() + nl, metric_cells.begin() + nl + nm);

  bool rule_pending = false;
  while (std::getline(in, line)) {
    if (IsRule(line)) {
      rule_pending = true;
      continue;
    }
    if (Trim(line).empty()) continue;
    auto cells = SplitCells(line);
    cells.resize(nl + ns * nm);
    ReportTable::Row row;
    row.labels.assign(cells.begin(), cells.begin() + nl);
    for (std::size_t c = nl; c < cells.size(); ++c) {
      if (cells[c].empty()) row.values.push_back(std::nullopt);
      else row.values.push_back(std::stod(cells[c]));
    }
    row.starts_group = rule_pending && !t.rows.empty();
    rule_pending = false;
    t.rows.push_back(std::move(row));
  }
  return t;
}

nlohmann::json TableRecords(const ReportTable& t) {
  nlohmann::json records = nlohmann::json::array();
  const std::size_t nm = t.metrics.size();
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.values.size(); ++c) {
      if (!row.values[c]) continue;
      nlohmann::json rec = {{"table", t.title},
                            {"labels", row.labels},
                            {"split", t.splits[c / nm]},
                            {"metric", t.metrics[c % nm]},
                            {"value", *row.values[c]}};
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::vector<ReferenceSegment> ReadReferences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read reference file " + path);
  std::vector<ReferenceSegment> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos)
      throw Error(path + ":" + std::to_string(number) + ": expected talk, segment and text");
    out.push_back({line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1)});
  }
  return out;
}

void WriteReferences(const std::string& path, const std::vector<ReferenceSegment>& segments) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write reference file " + path);
  for (const auto& s : segments) out << s.talk << '\t' << s.segment << '\t' << s.text << '\n';
}

}  // namespace slt

/*
 * Copyright 2026 The proxml authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "proxml/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace proxml {

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

uint64_t parse_uint(const char* begin, const char* end, size_t line_no, const char* what) {
  uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw DataError(std::string("malformed ") + what, line_no);
  return out;
}

double parse_real(const char* begin, const char* end, size_t line_no) {
  // from_chars<double> is available but strtod matches the repository
  // files' exponent spellings more leniently.
  std::string tmp(begin, end);
  errno = 0;
  char* stop = nullptr;
  double v = std::strtod(tmp.c_str(), &stop);
  if (stop != tmp.c_str() + tmp.size() || tmp.empty() || errno == ERANGE)
    throw DataError("malformed feature value '" + tmp + "'", line_no);
  return v;
}

// Parses the comma-separated label field into a sorted duplicate-free list.
std::vector<uint32_t> parse_label_field(const std::string& field, uint32_t n_labels,
                                        size_t line_no) {
  std::vector<uint32_t> out;
  if (field.empty()) return out;
  size_t start = 0;
  while (start <= field.size()) {
    size_t comma = field.find(',', start);
    size_t stop = comma == std::string::npos ? field.size() : comma;
    if (stop == start) throw DataError("empty label id in label field", line_no);
    uint64_t id = parse_uint(field.data() + start, field.data() + stop, line_no, "label id");
    if (id >= n_labels)
      throw DataError("label id " + std::to_string(id) + " out of range (L=" +
                          std::to_string(n_labels) + ")",
                      line_no);
    out.push_back(static_cast<uint32_t>(id));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Dataset parse_xmc(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing header line", 1);
  strip_cr(line);
  std::istringstream header(line);
  uint64_t n = 0, d = 0, l = 0;
  if (!(header >> n >> d >> l)) throw DataError("malformed header, expected 'N D L'", 1);
  std::string extra;
  if (header >> extra) throw DataError("malformed header, expected 'N D L'", 1);
  if (d > UINT32_MAX || l > UINT32_MAX) throw DataError("dimension exceeds 32-bit range", 1);

  Dataset data;
  data.n_features = static_cast<uint32_t>(d);
  data.n_labels = static_cast<uint32_t>(l);
  data.rows.reserve(n);
  data.labels.reserve(n);

  size_t line_no = 1;
  std::vector<SparseEntry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (data.rows.size() == n) {
      // Tolerate trailing blank lines only.
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      throw DataError("more data lines than header N=" + std::to_string(n), line_no);
    }

    // The label field is everything before the first space, unless it
    // contains ':' (a features-only line with no leading space).
    size_t space = line.find(' ');
    std::string label_field = space == std::string::npos ? line : line.substr(0, space);
    size_t feat_start = space == std::string::npos ? line.size() : space + 1;
    if (label_field.find(':') != std::string::npos) {
      label_field.clear();
      feat_start = 0;
    }
    data.labels.push_back(parse_label_field(label_field, data.n_labels, line_no));

    entries.clear();
    size_t pos = feat_start;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      if (pos >= line.size()) break;
      size_t stop = line.find(' ', pos);
      if (stop == std::string::npos) stop = line.size();
      size_t colon = line.find(':', pos);
      if (colon == std::string::npos || colon >= stop)
        throw DataError("malformed feature token '" + line.substr(pos, stop - pos) + "'", line_no);
      uint64_t idx = parse_uint(line.data() + pos, line.data() + colon, line_no, "feature index");
      if (idx >= data.n_features)
        throw DataError("feature index " + std::to_string(idx) + " out of range (D=" +
                            std::to_string(data.n_features) + ")",
                        line_no);
      double value = parse_real(line.data() + colon + 1, line.data() + stop, line_no);
      entries.push_back({static_cast<uint32_t>(idx), value});
      pos = stop;
    }
    std::sort(entries.begin(), entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    for (size_t k = 1; k < entries.size(); ++k) {
      if (entries[k].index == entries[k - 1].index)
        throw DataError("duplicate feature index " + std::to_string(entries[k].index), line_no);
    }
    data.rows.push_back(SparseVector::from_entries(data.n_features, entries));
    if (data.rows.back().empty()) ++data.n_empty_rows;
    if (data.labels.back().empty()) ++data.n_unlabeled_rows;
  }
  if (data.rows.size() != n)
    throw DataError("header declares N=" + std::to_string(n) + " but file has " +
                        std::to_string(data.rows.size()) + " data lines",
                    line_no + 1);
  return data;
}

Dataset parse_xmc_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file '" + path + "'");
  return parse_xmc(in);
}

void write_xmc(const Dataset& data, std::ostream& out) {
  out << data.n_instances() << ' ' << data.n_features << ' ' << data.n_labels << '\n';
  char buf[48];
  for (size_t i = 0; i < data.n_instances(); ++i) {
    const auto& labels = data.labels[i];
    for (size_t k = 0; k < labels.size(); ++k) {
      if (k) out << ',';
      out << labels[k];
    }
    for (const auto& e : data.rows[i].entries()) {
      int len = std::snprintf(buf, sizeof(buf), " %u:%.17g", e.index, e.value);
      out.write(buf, len);
    }
    out << '\n';
  }
}

LabelIndex::LabelIndex(const Dataset& data) {
  std::vector<size_t> counts(data.n_labels + 1, 0);
  for (const auto& row_labels : data.labels)
    for (uint32_t l : row_labels) counts[l]++;
  offsets_.assign(data.n_labels + 1, 0);
  for (uint32_t l = 0; l < data.n_labels; ++l) offsets_[l + 1] = offsets_[l] + counts[l];
  instances_.resize(offsets_.back());
  std::vector<size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (uint32_t i = 0; i < data.n_instances(); ++i)
    for (uint32_t l : data.labels[i]) instances_[cursor[l]++] = i;
}

LabelView label_view(const Dataset& data, uint32_t label_id) {
  if (label_id >= data.n_labels)
    throw DataError("label id " + std::to_string(label_id) + " out of range");
  LabelView view;
  view.label_id = label_id;
  for (uint32_t i = 0; i < data.n_instances(); ++i) {
    if (std::binary_search(data.labels[i].begin(), data.labels[i].end(), label_id))
      view.positives.push_back(i);
  }
  return view;
}

std::vector<uint32_t> label_counts(const Dataset& data) {
  std::vector<uint32_t> counts(data.n_labels, 0);
  for (const auto& row_labels : data.labels)
    for (uint32_t l : row_labels) counts[l]++;
  return counts;
}

std::vector<int8_t> sign_vector(const Dataset& data, std::span<const uint32_t> positives) {
  std::vector<int8_t> s(data.n_instances(), -1);
  for (uint32_t i : positives) s[i] = 1;
  return s;
}

Dataset augment_bias(const Dataset& data) {
  Dataset out;
  out.n_features = data.n_features + 1;
  out.n_labels = data.n_labels;
  out.labels = data.labels;
  out.n_unlabeled_rows = data.n_unlabeled_rows;
  out.rows.reserve(data.rows.size());
  for (const auto& row : data.rows) {
    SparseVector r(out.n_features);
    for (const auto& e : row.entries()) r.push_back(e.index, e.value);
    r.push_back(data.n_features, 1.0);
    out.rows.push_back(std::move(r));
  }
  return out;
}

Dataset l2_normalize_rows(const Dataset& data) {
  Dataset out = data;
  for (auto& row : out.rows) {
    double norm_sq = row.l2_norm_sq();
    if (norm_sq > 0.0) row.scale(1.0 / std::sqrt(norm_sq));
  }
  return out;
}

namespace {
constexpr uint64_t kFnvOffset = 1469598103934665603ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

void fnv_mix(uint64_t& h, const void* bytes, size_t n) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

template <typename T>
void fnv_mix_value(uint64_t& h, T v) {
  fnv_mix(h, &v, sizeof(v));
}
}  // namespace

uint64_t dataset_fingerprint(const Dataset& data) {
  uint64_t h = kFnvOffset;
  fnv_mix_value(h, static_cast<uint64_t>(data.n_instances()));
  fnv_mix_value(h, data.n_features);
  fnv_mix_value(h, data.n_labels);
  for (size_t i = 0; i < data.n_instances(); ++i) {
    for (const auto& e : data.rows[i].entries()) {
      fnv_mix_value(h, e.index);
      fnv_mix_value(h, e.value);
    }
    fnv_mix_value(h, static_cast<uint32_t>(0xffffffff));
    for (uint32_t l : data.labels[i]) fnv_mix_value(h, l);
    fnv_mix_value(h, static_cast<uint32_t>(0xfffffffe));
  }
  return h;
}

}  // namespace proxml

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
#ifndef PROXML_DATASET_HPP_
#define PROXML_DATASET_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "proxml/sparse.hpp"

namespace proxml {

// A sparse multi-label dataset: N instances over D features and L labels.
// Immutable after construction; safe to share across threads.
struct Dataset {
  uint32_t n_features = 0;  // D
  uint32_t n_labels = 0;    // L
  std::vector<SparseVector> rows;
  std::vector<std::vector<uint32_t>> labels;  // sorted, duplicate-free, < n_labels
  size_t n_empty_rows = 0;                    // instances with no features
  size_t n_unlabeled_rows = 0;                // instances with no positive labels

  size_t n_instances() const { return rows.size(); }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.n_features == b.n_features && a.n_labels == b.n_labels && a.rows == b.rows &&
           a.labels == b.labels;
  }
};

// One label's positive-instance set. The implied sign vector has +1 at the
// listed instances and -1 elsewhere.
struct LabelView {
  uint32_t label_id = 0;
  std::vector<uint32_t> positives;  // sorted instance ids
  size_t n_pos() const { return positives.size(); }
};

// Per-label positive-instance lists, built in one pass over all label
// entries so that individual views cost O(n_pos).
class LabelIndex {
 public:
  explicit LabelIndex(const Dataset& data);
  std::span<const uint32_t> positives(uint32_t label_id) const {
    return {instances_.data() + offsets_[label_id], instances_.data() + offsets_[label_id + 1]};
  }
  size_t n_pos(uint32_t label_id) const { return offsets_[label_id + 1] - offsets_[label_id]; }

 private:
  std::vector<size_t> offsets_;
  std::vector<uint32_t> instances_;
};

// Text format of the public multi-label repositories: a "N D L" header,
// then one line per instance, "l1,l2,... f1:v1 f2:v2 ...". The label field
// may be empty. Accepts "\n" and "\r\n".
Dataset parse_xmc(std::istream& in);
Dataset parse_xmc_file(const std::string& path);

// Canonical serialization; parse_xmc(write_xmc(d)) == d.
void write_xmc(const Dataset& data, std::ostream& out);

LabelView label_view(const Dataset& data, uint32_t label_id);

// positives count per label; counts[l] == label_view(data, l).n_pos().
std::vector<uint32_t> label_counts(const Dataset& data);

// Materializes the +-1 sign vector for one label.
std::vector<int8_t> sign_vector(const Dataset& data, std::span<const uint32_t> positives);

// Appends a constant feature of value 1.0 at index D to every row. The new
// dimension participates in regularization like any other.
Dataset augment_bias(const Dataset& data);

// Scales every row to unit L2 norm; all-zero rows are left unchanged.
Dataset l2_normalize_rows(const Dataset& data);

// Content hash (FNV-1a over a canonical encoding); used to stamp models.
uint64_t dataset_fingerprint(const Dataset& data);

}  // namespace proxml

#endif  // PROXML_DATASET_HPP_

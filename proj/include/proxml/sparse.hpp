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
#ifndef PROXML_SPARSE_HPP_
#define PROXML_SPARSE_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "proxml/errors.hpp"

namespace proxml {

struct SparseEntry {
  uint32_t index;
  double value;
  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Index-value sparse vector. Indices are strictly increasing and below
// dim(); stored values are never exactly zero.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(uint32_t dim) : dim_(dim) {}

  // Validates ordering and range; drops exact zeros.
  static SparseVector from_entries(uint32_t dim, std::vector<SparseEntry> entries) {
    SparseVector v(dim);
    uint32_t prev = 0;
    bool first = true;
    for (const auto& e : entries) {
      if (e.index >= dim) throw DataError("sparse index out of range");
      if (!first && e.index <= prev) throw DataError("sparse indices not strictly increasing");
      prev = e.index;
      first = false;
      if (e.value != 0.0) v.entries_.push_back(e);
    }
    return v;
  }

  static SparseVector from_dense(std::span<const double> dense) {
    SparseVector v(static_cast<uint32_t>(dense.size()));
    for (uint32_t d = 0; d < dense.size(); ++d) {
      if (dense[d] != 0.0) v.entries_.push_back({d, dense[d]});
    }
    return v;
  }

  uint32_t dim() const { return dim_; }
  size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const SparseEntry> entries() const { return entries_; }

  // Appends an entry with an index larger than all current ones.
  void push_back(uint32_t index, double value) {
    if (index >= dim_) throw DataError("sparse index out of range");
    if (!entries_.empty() && index <= entries_.back().index)
      throw DataError("sparse indices not strictly increasing");
    if (value != 0.0) entries_.push_back({index, value});
  }

  double dot(std::span<const double> dense) const {
    double acc = 0.0;
    for (const auto& e : entries_) acc += e.value * dense[e.index];
    return acc;
  }

  double l1_norm() const {
    double acc = 0.0;
    for (const auto& e : entries_) acc += e.value < 0 ? -e.value : e.value;
    return acc;
  }

  double l2_norm_sq() const {
    double acc = 0.0;
    for (const auto& e : entries_) acc += e.value * e.value;
    return acc;
  }

  void scale(double factor) {
    for (auto& e : entries_) e.value *= factor;
  }

  void to_dense(std::span<double> out) const {
    for (auto& x : out) x = 0.0;
    for (const auto& e : entries_) out[e.index] = e.value;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<SparseEntry> entries_;
  uint32_t dim_ = 0;
};

// Row-major (instance-major) compressed storage used by the solvers' inner
// loops. Built once per training run from the parsed rows.
struct CsrMatrix {
  uint32_t n_rows = 0;
  uint32_t n_cols = 0;
  std::vector<size_t> indptr;     // n_rows + 1
  std::vector<uint32_t> indices;  // column ids per row, ascending
  std::vector<double> values;

  std::span<const uint32_t> row_indices(uint32_t i) const {
    return {indices.data() + indptr[i], indices.data() + indptr[i + 1]};
  }
  std::span<const double> row_values(uint32_t i) const {
    return {values.data() + indptr[i], values.data() + indptr[i + 1]};
  }
  size_t row_nnz(uint32_t i) const { return indptr[i + 1] - indptr[i]; }

  static CsrMatrix from_rows(std::span<const SparseVector> rows, uint32_t n_cols) {
    CsrMatrix m;
    m.n_rows = static_cast<uint32_t>(rows.size());
    m.n_cols = n_cols;
    m.indptr.reserve(rows.size() + 1);
    m.indptr.push_back(0);
    size_t total = 0;
    for (const auto& r : rows) total += r.nnz();
    m.indices.reserve(total);
    m.values.reserve(total);
    for (const auto& r : rows) {
      for (const auto& e : r.entries()) {
        m.indices.push_back(e.index);
        m.values.push_back(e.value);
      }
      m.indptr.push_back(m.indices.size());
    }
    return m;
  }

  CsrMatrix transpose() const {
    CsrMatrix t;
    t.n_rows = n_cols;
    t.n_cols = n_rows;
    std::vector<size_t> counts(n_cols, 0);
    for (uint32_t c : indices) counts[c]++;
    t.indptr.assign(n_cols + 1, 0);
    for (uint32_t c = 0; c < n_cols; ++c) t.indptr[c + 1] = t.indptr[c] + counts[c];
    t.indices.resize(indices.size());
    t.values.resize(values.size());
    std::vector<size_t> cursor(t.indptr.begin(), t.indptr.end() - 1);
    for (uint32_t r = 0; r < n_rows; ++r) {
      for (size_t k = indptr[r]; k < indptr[r + 1]; ++k) {
        size_t dst = cursor[indices[k]]++;
        t.indices[dst] = r;
        t.values[dst] = values[k];
      }
    }
    return t;
  }
};

}  // namespace proxml

#endif  // PROXML_SPARSE_HPP_

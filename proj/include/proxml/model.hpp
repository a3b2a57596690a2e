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
#ifndef PROXML_MODEL_HPP_
#define PROXML_MODEL_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "proxml/sparse.hpp"

namespace proxml {

enum class SolverKind : uint32_t { kProx = 0, kCcd = 1 };

const char* solver_name(SolverKind kind);

enum class LabelStatus : uint8_t {
  kTrained = 0,
  kSkippedNoPositives = 1,  // zero weight vector by construction
  kFailed = 2,              // solver error; weights zeroed, run continues
};

struct LabelStats {
  uint32_t n_pos = 0;
  int iters = 0;
  double objective = 0.0;
  uint64_t nnz = 0;
  bool converged = false;
  LabelStatus status = LabelStatus::kTrained;
  double seconds = 0.0;  // wall clock; reported in the training log, never persisted
  std::string diagnostic;
};

// One-vs-rest linear model: L sparse weight vectors over D features
// (plus a trailing bias coordinate when trained with one).
struct Model {
  uint32_t n_raw_features = 0;  // D of the training data, bias excluded
  uint32_t n_labels = 0;
  bool has_bias = false;
  bool rows_l2_normalized = false;
  double lambda = 0.0;
  SolverKind solver = SolverKind::kProx;
  uint64_t dataset_fingerprint = 0;
  std::vector<SparseVector> weights;  // size n_labels, dim = D (+1 with bias)
  std::vector<LabelStats> stats;      // size n_labels
  double train_seconds = 0.0;         // in-memory only

  uint32_t weight_dim() const { return n_raw_features + (has_bias ? 1 : 0); }
  size_t total_nnz() const;
};

// Versioned little-endian binary format: header, per-label delta-encoded
// sparse runs, a JSON metadata blob, and a trailing CRC32. Timing fields
// are deliberately left out so identical configs write identical bytes.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// CSV: label_id,n_pos,iters,objective,nnz,seconds
void write_train_log(const Model& model, std::ostream& out);

}  // namespace proxml

#endif  // PROXML_MODEL_HPP_

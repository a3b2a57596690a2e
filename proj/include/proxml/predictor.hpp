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
#ifndef PROXML_PREDICTOR_HPP_
#define PROXML_PREDICTOR_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "proxml/dataset.hpp"
#include "proxml/model.hpp"
#include "proxml/sparse.hpp"

namespace proxml {

struct ScoredLabel {
  uint32_t label = 0;
  double score = 0.0;
  friend bool operator==(const ScoredLabel&, const ScoredLabel&) = default;
};

// Top-k predictions, scores non-increasing, ties broken by ascending
// label id.
struct TopK {
  std::vector<ScoredLabel> entries;
};

// Feature-major view of the model: test instances have a few hundred
// nonzeros, so walking feature postings beats L dot products.
class InvertedIndex {
 public:
  explicit InvertedIndex(const Model& model);

  // scores[l] = <w^(l), x>. x must have the model's raw feature
  // dimensionality; the bias column, if any, is applied internally.
  void score_all(const SparseVector& x, std::span<double> scores) const;

  uint32_t n_labels() const { return n_labels_; }
  uint32_t n_raw_features() const { return n_raw_features_; }

 private:
  struct Posting {
    uint32_t label;
    double weight;
  };
  uint32_t n_labels_ = 0;
  uint32_t n_raw_features_ = 0;
  bool normalize_rows_ = false;
  std::vector<size_t> offsets_;   // n_raw_features + 1
  std::vector<Posting> postings_;
  std::vector<double> bias_;      // per-label bias weight (zeros without bias)
};

// Bounded-heap selection; 1 <= k <= scores.size().
TopK top_k(std::span<const double> scores, size_t k);

// Batch prediction, parallel over instances. When latency_ms is non-null
// it receives one per-instance wall-clock measurement in milliseconds.
std::vector<TopK> predict_topk(const Model& model, const Dataset& data, size_t k, int threads,
                               std::vector<double>* latency_ms = nullptr);

// One line per instance, tab-separated "label:score" pairs in rank order.
void write_predictions(std::span<const TopK> preds, std::ostream& out);
std::vector<TopK> read_predictions(std::istream& in);
std::vector<TopK> read_predictions_file(const std::string& path);

}  // namespace proxml

#endif  // PROXML_PREDICTOR_HPP_

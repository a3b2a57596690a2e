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
#ifndef PROXML_METRICS_HPP_
#define PROXML_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "proxml/predictor.hpp"

namespace proxml {

// Per-label propensities p_l = 1 / (1 + C exp(-A log(N_l + B))) with
// C = (log n_train - 1)(B + 1)^A, from the label's positive TRAINING
// count N_l. Head labels approach 1, tail labels fall well below.
struct PropensityTable {
  std::vector<double> p;  // in (0, 1], one per label
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

PropensityTable propensities(std::span<const uint32_t> label_counts, double a, double b,
                             uint64_t n_train);

// Propensity-scored precision at k: (1/k) * sum over predicted-and-true
// labels in the top k of 1/p_l. Truth lists must be sorted.
double psp_at_k(const TopK& pred, std::span<const uint32_t> truth, const PropensityTable& table,
                size_t k);

// Propensity-scored nDCG at k. The discount log2(r + 1) uses the 1-based
// rank r of the prediction slot; the normalizer sums the first
// min(k, |truth|) discounts.
double psndcg_at_k(const TopK& pred, std::span<const uint32_t> truth,
                   const PropensityTable& table, size_t k);

// Vanilla variants: identical formulas with p = 1 everywhere.
double p_at_k(const TopK& pred, std::span<const uint32_t> truth, size_t k);
double ndcg_at_k(const TopK& pred, std::span<const uint32_t> truth, size_t k);

// Best achievable per-instance gains, from predicting the true labels in
// descending 1/p order.
double ideal_psp_at_k(std::span<const uint32_t> truth, const PropensityTable& table, size_t k);
double ideal_psndcg_at_k(std::span<const uint32_t> truth, const PropensityTable& table, size_t k);
double ideal_p_at_k(std::span<const uint32_t> truth, size_t k);
double ideal_ndcg_at_k(std::span<const uint32_t> truth, size_t k);

// 100 * mean(achieved) / mean(ideal); empty-truth instances contribute
// zero to both sums. Undefined (nullopt) when every instance is empty.
std::optional<double> normalized_gain(std::span<const double> achieved,
                                      std::span<const double> ideal);

// Propensity-weighted fraction of distinct ground-truth labels predicted
// correctly in some top-k list across the whole test set.
double coverage_at_k(std::span<const TopK> preds,
                     std::span<const std::vector<uint32_t>> truth, const PropensityTable& table,
                     size_t k);

struct MetricValue {
  double raw_mean = 0.0;                 // percent
  std::optional<double> normalized;     // percent, 100 * G(pred)/G(truth)
};

struct EvalReport {
  std::vector<size_t> ks;
  std::vector<MetricValue> p, ndcg, psp, psndcg;  // one entry per k
  std::vector<double> coverage;                   // fraction in [0, 1]
  size_t n_instances = 0;
  size_t n_empty_truth = 0;
};

EvalReport evaluate(std::span<const TopK> preds, std::span<const std::vector<uint32_t>> truth,
                    const PropensityTable& table, std::span<const size_t> ks, int threads = 1);

}  // namespace proxml

#endif  // PROXML_METRICS_HPP_

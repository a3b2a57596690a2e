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
#include "proxml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_set>

#include "proxml/errors.hpp"

namespace proxml {

namespace {

double inv_p(const std::vector<double>* p, uint32_t label) {
  return p ? 1.0 / (*p)[label] : 1.0;
}

bool contains(std::span<const uint32_t> sorted, uint32_t label) {
  return std::binary_search(sorted.begin(), sorted.end(), label);
}

double discount(size_t rank_1based) { return 1.0 / std::log2(static_cast<double>(rank_1based) + 1.0); }

double psp_impl(const TopK& pred, std::span<const uint32_t> truth, const std::vector<double>* p,
                size_t k) {
  if (k < 1) throw DataError("k must be >= 1");
  double gain = 0.0;
  size_t slots = std::min(k, pred.entries.size());
  for (size_t r = 0; r < slots; ++r) {
    uint32_t label = pred.entries[r].label;
    if (contains(truth, label)) gain += inv_p(p, label);
  }
  return gain / static_cast<double>(k);
}

double psndcg_impl(const TopK& pred, std::span<const uint32_t> truth, const std::vector<double>* p,
                   size_t k) {
  if (k < 1) throw DataError("k must be >= 1");
  if (truth.empty()) return 0.0;
  double dcg = 0.0;
  size_t slots = std::min(k, pred.entries.size());
  for (size_t r = 0; r < slots; ++r) {
    uint32_t label = pred.entries[r].label;
    if (contains(truth, label)) dcg += inv_p(p, label) * discount(r + 1);
  }
  double norm = 0.0;
  for (size_t r = 1; r <= std::min(k, truth.size()); ++r) norm += discount(r);
  return dcg / norm;
}

// Truth's 1/p values sorted descending; shared by the ideal gains.
std::vector<double> sorted_inverse_propensities(std::span<const uint32_t> truth,
                                                const std::vector<double>* p) {
  std::vector<double> inv(truth.size());
  for (size_t i = 0; i < truth.size(); ++i) inv[i] = inv_p(p, truth[i]);
  std::sort(inv.begin(), inv.end(), std::greater<>());
  return inv;
}

double ideal_psp_impl(std::span<const uint32_t> truth, const std::vector<double>* p, size_t k) {
  auto inv = sorted_inverse_propensities(truth, p);
  double gain = 0.0;
  for (size_t r = 0; r < std::min(k, inv.size()); ++r) gain += inv[r];
  return gain / static_cast<double>(k);
}

double ideal_psndcg_impl(std::span<const uint32_t> truth, const std::vector<double>* p, size_t k) {
  if (truth.empty()) return 0.0;
  auto inv = sorted_inverse_propensities(truth, p);
  size_t slots = std::min(k, inv.size());
  double dcg = 0.0, norm = 0.0;
  for (size_t r = 1; r <= slots; ++r) {
    dcg += inv[r - 1] * discount(r);
    norm += discount(r);
  }
  return dcg / norm;
}

}  // namespace

PropensityTable propensities(std::span<const uint32_t> label_counts, double a, double b,
                             uint64_t n_train) {
  if (a <= 0.0) throw DataError("propensity parameter A must be > 0");
  if (b < 0.0) throw DataError("propensity parameter B must be >= 0");
  if (n_train < 3) throw DataError("propensity model needs n_train >= 3 (log N > 1)");

  PropensityTable table;
  table.a = a;
  table.b = b;
  table.c = (std::log(static_cast<double>(n_train)) - 1.0) * std::pow(b + 1.0, a);
  table.p.resize(label_counts.size());
  for (size_t l = 0; l < label_counts.size(); ++l) {
    double shifted = static_cast<double>(label_counts[l]) + b;
    if (shifted <= 0.0)
      throw DataError("propensity undefined for a zero-count label with B = 0");
    table.p[l] = 1.0 / (1.0 + table.c * std::exp(-a * std::log(shifted)));
  }
  return table;
}

double psp_at_k(const TopK& pred, std::span<const uint32_t> truth, const PropensityTable& table,
                size_t k) {
  return psp_impl(pred, truth, &table.p, k);
}

double psndcg_at_k(const TopK& pred, std::span<const uint32_t> truth,
                   const PropensityTable& table, size_t k) {
  return psndcg_impl(pred, truth, &table.p, k);
}

double p_at_k(const TopK& pred, std::span<const uint32_t> truth, size_t k) {
  return psp_impl(pred, truth, nullptr, k);
}

double ndcg_at_k(const TopK& pred, std::span<const uint32_t> truth, size_t k) {
  return psndcg_impl(pred, truth, nullptr, k);
}

double ideal_psp_at_k(std::span<const uint32_t> truth, const PropensityTable& table, size_t k) {
  return ideal_psp_impl(truth, &table.p, k);
}

double ideal_psndcg_at_k(std::span<const uint32_t> truth, const PropensityTable& table,
                         size_t k) {
  return ideal_psndcg_impl(truth, &table.p, k);
}

double ideal_p_at_k(std::span<const uint32_t> truth, size_t k) {
  return ideal_psp_impl(truth, nullptr, k);
}

double ideal_ndcg_at_k(std::span<const uint32_t> truth, size_t k) {
  return ideal_psndcg_impl(truth, nullptr, k);
}

std::optional<double> normalized_gain(std::span<const double> achieved,
                                      std::span<const double> ideal) {
  double num = 0.0, den = 0.0;
  for (double g : achieved) num += g;
  for (double g : ideal) den += g;
  if (den <= 0.0) return std::nullopt;
  return 100.0 * num / den;
}

double coverage_at_k(std::span<const TopK> preds,
                     std::span<const std::vector<uint32_t>> truth, const PropensityTable& table,
                     size_t k) {
  std::unordered_set<uint32_t> truth_labels, covered;
  for (size_t i = 0; i < truth.size(); ++i) {
    for (uint32_t l : truth[i]) truth_labels.insert(l);
    size_t slots = std::min(k, preds[i].entries.size());
    for (size_t r = 0; r < slots; ++r) {
      uint32_t label = preds[i].entries[r].label;
      if (contains(truth[i], label)) covered.insert(label);
    }
  }
  // summed in label order so the value is reproducible bit for bit
  auto weighted = [&table](const std::unordered_set<uint32_t>& labels) {
    std::vector<uint32_t> sorted(labels.begin(), labels.end());
    std::sort(sorted.begin(), sorted.end());
    double acc = 0.0;
    for (uint32_t l : sorted) acc += 1.0 / table.p[l];
    return acc;
  };
  double den = weighted(truth_labels);
  return den > 0.0 ? weighted(covered) / den : 0.0;
}

EvalReport evaluate(std::span<const TopK> preds, std::span<const std::vector<uint32_t>> truth,
                    const PropensityTable& table, std::span<const size_t> ks, int threads) {
  if (preds.size() != truth.size())
    throw DataError("prediction and ground-truth counts differ (" + std::to_string(preds.size()) +
                    " vs " + std::to_string(truth.size()) + ")");
  const size_t n = preds.size();
  const size_t nk = ks.size();

  EvalReport report;
  report.ks.assign(ks.begin(), ks.end());
  report.n_instances = n;
  for (size_t i = 0; i < n; ++i)
    if (truth[i].empty()) report.n_empty_truth++;

  // Per-instance gains, filled independently, reduced in index order so
  // the result is identical for any thread count.
  struct Gains {
    std::vector<double> achieved;  // nk * 4
    std::vector<double> ideal;
  };
  Gains g;
  g.achieved.assign(n * nk * 4, 0.0);
  g.ideal.assign(n * nk * 4, 0.0);

  auto fill = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      for (size_t ki = 0; ki < nk; ++ki) {
        size_t base = (i * nk + ki) * 4;
        size_t k = ks[ki];
        g.achieved[base + 0] = p_at_k(preds[i], truth[i], k);
        g.achieved[base + 1] = ndcg_at_k(preds[i], truth[i], k);
        g.achieved[base + 2] = psp_at_k(preds[i], truth[i], table, k);
        g.achieved[base + 3] = psndcg_at_k(preds[i], truth[i], table, k);
        g.ideal[base + 0] = ideal_p_at_k(truth[i], k);
        g.ideal[base + 1] = ideal_ndcg_at_k(truth[i], k);
        g.ideal[base + 2] = ideal_psp_at_k(truth[i], table, k);
        g.ideal[base + 3] = ideal_psndcg_at_k(truth[i], table, k);
      }
    }
  };

  int usable = std::max(1, threads);
  if (usable == 1 || n < 2) {
    fill(0, n);
  } else {
    std::vector<std::thread> pool;
    size_t chunk = (n + usable - 1) / usable;
    for (int t = 0; t < usable; ++t) {
      size_t begin = t * chunk;
      size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(fill, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  const size_t n_nonempty = n - report.n_empty_truth;
  report.p.resize(nk);
  report.ndcg.resize(nk);
  report.psp.resize(nk);
  report.psndcg.resize(nk);
  report.coverage.resize(nk);
  for (size_t ki = 0; ki < nk; ++ki) {
    std::vector<double> achieved(n), ideal(n);
    for (int metric = 0; metric < 4; ++metric) {
      for (size_t i = 0; i < n; ++i) {
        achieved[i] = g.achieved[(i * nk + ki) * 4 + metric];
        ideal[i] = g.ideal[(i * nk + ki) * 4 + metric];
      }
      double sum = 0.0;
      for (double v : achieved) sum += v;
      // Precision-style raw means average over every instance; the
      // nDCG-style ones skip instances whose ideal gain is zero.
      bool ndcg_style = metric == 1 || metric == 3;
      size_t denom = ndcg_style ? n_nonempty : n;
      MetricValue value;
      value.raw_mean = denom > 0 ? 100.0 * sum / static_cast<double>(denom) : 0.0;
      value.normalized = normalized_gain(achieved, ideal);
      (metric == 0   ? report.p
       : metric == 1 ? report.ndcg
       : metric == 2 ? report.psp
                     : report.psndcg)[ki] = value;
    }
    report.coverage[ki] = coverage_at_k(preds, truth, table, ks[ki]);
  }
  return report;
}

}  // namespace proxml

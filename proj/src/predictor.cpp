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
#include "proxml/predictor.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include "proxml/errors.hpp"

namespace proxml {

InvertedIndex::InvertedIndex(const Model& model)
    : n_labels_(model.n_labels),
      n_raw_features_(model.n_raw_features),
      normalize_rows_(model.rows_l2_normalized),
      bias_(model.n_labels, 0.0) {
  std::vector<size_t> counts(n_raw_features_, 0);
  for (uint32_t l = 0; l < n_labels_; ++l) {
    for (const auto& e : model.weights[l].entries()) {
      if (e.index < n_raw_features_)
        counts[e.index]++;
      else
        bias_[l] = e.value;
    }
  }
  offsets_.assign(n_raw_features_ + 1, 0);
  for (uint32_t d = 0; d < n_raw_features_; ++d) offsets_[d + 1] = offsets_[d] + counts[d];
  postings_.resize(offsets_.back());
  std::vector<size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  // Label-ascending fill per feature keeps accumulation order fixed.
  for (uint32_t l = 0; l < n_labels_; ++l) {
    for (const auto& e : model.weights[l].entries()) {
      if (e.index < n_raw_features_) postings_[cursor[e.index]++] = {l, e.value};
    }
  }
}

void InvertedIndex::score_all(const SparseVector& x, std::span<double> scores) const {
  if (x.dim() != n_raw_features_)
    throw DataError("instance dimensionality " + std::to_string(x.dim()) +
                    " does not match model feature count " + std::to_string(n_raw_features_));
  std::fill(scores.begin(), scores.end(), 0.0);
  double scale = 1.0;
  if (normalize_rows_) {
    double norm_sq = x.l2_norm_sq();
    if (norm_sq > 0.0) scale = 1.0 / std::sqrt(norm_sq);
  }
  for (const auto& e : x.entries()) {
    double v = e.value * scale;
    for (size_t k = offsets_[e.index]; k < offsets_[e.index + 1]; ++k)
      scores[postings_[k].label] += v * postings_[k].weight;
  }
  for (uint32_t l = 0; l < n_labels_; ++l) scores[l] += bias_[l];
}

TopK top_k(std::span<const double> scores, size_t k) {
  if (k < 1 || k > scores.size())
    throw DataError("k = " + std::to_string(k) + " out of range [1, " +
                    std::to_string(scores.size()) + "]");

  // Heaped with a better-than relation, so the worst kept entry sits at
  // the front for cheap eviction.
  auto better = [](const ScoredLabel& a, const ScoredLabel& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.label < b.label;
  };
  std::vector<ScoredLabel> heap;
  heap.reserve(k);
  for (uint32_t l = 0; l < scores.size(); ++l) {
    ScoredLabel cand{l, scores[l]};
    if (heap.size() < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), better);
    } else if (better(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), better);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), better);
    }
  }
  std::sort_heap(heap.begin(), heap.end(), better);
  return TopK{std::move(heap)};
}

void write_predictions(std::span<const TopK> preds, std::ostream& out) {
  char buf[64];
  for (const auto& pred : preds) {
    bool first = true;
    for (const auto& e : pred.entries) {
      int len = std::snprintf(buf, sizeof(buf), "%s%u:%.9g", first ? "" : "\t", e.label, e.score);
      out.write(buf, len);
      first = false;
    }
    out << '\n';
  }
}

std::vector<TopK> read_predictions(std::istream& in) {
  std::vector<TopK> preds;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    TopK topk;
    size_t pos = 0;
    while (pos < line.size()) {
      size_t tab = line.find('\t', pos);
      size_t stop = tab == std::string::npos ? line.size() : tab;
      size_t colon = line.find(':', pos);
      if (colon == std::string::npos || colon >= stop)
        throw DataError("malformed prediction token '" + line.substr(pos, stop - pos) + "'",
                        line_no);
      uint32_t label = 0;
      auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + colon, label);
      if (ec != std::errc() || ptr != line.data() + colon)
        throw DataError("malformed prediction label id", line_no);
      std::string score_text = line.substr(colon + 1, stop - colon - 1);
      errno = 0;
      char* end = nullptr;
      double score = std::strtod(score_text.c_str(), &end);
      if (end != score_text.c_str() + score_text.size() || score_text.empty() || errno == ERANGE)
        throw DataError("malformed prediction score '" + score_text + "'", line_no);
      topk.entries.push_back({label, score});
      pos = stop + (tab == std::string::npos ? 0 : 1);
      if (tab == std::string::npos) break;
    }
    preds.push_back(std::move(topk));
  }
  return preds;
}

std::vector<TopK> read_predictions_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open prediction file '" + path + "'");
  return read_predictions(in);
}

std::vector<TopK> predict_topk(const Model& model, const Dataset& data, size_t k, int threads,
                               std::vector<double>* latency_ms) {
  InvertedIndex index(model);
  const size_t n = data.n_instances();
  std::vector<TopK> out(n);
  if (latency_ms) latency_ms->assign(n, 0.0);

  auto worker = [&](size_t begin, size_t end) {
    std::vector<double> scores(model.n_labels);
    for (size_t i = begin; i < end; ++i) {
      auto t0 = std::chrono::steady_clock::now();
      index.score_all(data.rows[i], scores);
      out[i] = top_k(scores, k);
      if (latency_ms)
        (*latency_ms)[i] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
    }
  };

  int usable = std::max(1, threads);
  if (usable == 1 || n < 2) {
    worker(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  size_t chunk = (n + usable - 1) / usable;
  for (int t = 0; t < usable; ++t) {
    size_t begin = t * chunk;
    size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(worker, begin, end);
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace proxml

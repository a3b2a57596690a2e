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
#include "proxml/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <numeric>
#include <thread>

#include "proxml/errors.hpp"
#include "proxml/predictor.hpp"

namespace proxml {

void TrainConfig::validate() const {
  if (threads < 1) throw NumericalError("threads must be >= 1");
  prox.validate();
  ccd.validate();
}

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Model train_all_with(const Dataset& raw, const TrainConfig& config, const LabelSolveFn& solve) {
  config.validate();
  auto run_start = std::chrono::steady_clock::now();

  const Dataset* source = &raw;
  Dataset transformed;
  if (config.l2_normalize) {
    transformed = l2_normalize_rows(raw);
    source = &transformed;
  }
  if (config.add_bias) {
    transformed = augment_bias(*source);
    source = &transformed;
  }
  const Dataset& data = *source;

  Model model;
  model.n_raw_features = raw.n_features;
  model.n_labels = raw.n_labels;
  model.has_bias = config.add_bias;
  model.rows_l2_normalized = config.l2_normalize;
  model.lambda = config.solver == SolverKind::kProx ? config.prox.lambda : config.ccd.lambda;
  model.solver = config.solver;
  model.dataset_fingerprint = dataset_fingerprint(raw);
  model.weights.assign(model.n_labels, SparseVector(model.weight_dim()));
  model.stats.assign(model.n_labels, LabelStats{});

  CsrMatrix x = CsrMatrix::from_rows(data.rows, data.n_features);
  LabelIndex index(data);

  // Biggest labels first so stragglers don't land at the tail of the run.
  std::vector<uint32_t> order(model.n_labels);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return index.n_pos(a) != index.n_pos(b) ? index.n_pos(a) > index.n_pos(b) : a < b;
  });

  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    std::vector<int8_t> signs(data.n_instances());
    while (true) {
      size_t slot = cursor.fetch_add(1, std::memory_order_relaxed);
      if (slot >= order.size()) break;
      uint32_t label = order[slot];
      LabelStats& st = model.stats[label];
      st.n_pos = static_cast<uint32_t>(index.n_pos(label));

      if (st.n_pos == 0) {
        st.status = LabelStatus::kSkippedNoPositives;
        st.objective = static_cast<double>(data.n_instances());  // loss at w = 0
        continue;
      }

      auto label_start = std::chrono::steady_clock::now();
      std::fill(signs.begin(), signs.end(), int8_t{-1});
      for (uint32_t i : index.positives(label)) signs[i] = 1;
      try {
        SolveResult result = solve(label, x, signs);
        model.weights[label] = std::move(result.w);
        st.iters = result.iters;
        st.objective = result.objective;
        st.nnz = model.weights[label].nnz();
        st.converged = result.converged;
        st.status = LabelStatus::kTrained;
      } catch (const std::exception& e) {
        model.weights[label] = SparseVector(model.weight_dim());
        st.status = LabelStatus::kFailed;
        st.converged = false;
        st.diagnostic = e.what();
      }
      st.seconds = elapsed_seconds(label_start);
    }
  };

  if (config.threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(config.threads);
    for (int t = 0; t < config.threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  model.train_seconds = elapsed_seconds(run_start);
  return model;
}

Model train_all(const Dataset& data, const TrainConfig& config) {
  if (config.solver == SolverKind::kProx) {
    return train_all_with(data, config,
                          [&config](uint32_t, const CsrMatrix& x, std::span<const int8_t> s) {
                            return solve_prox(x, s, config.prox);
                          });
  }
  return train_all_with(data, config,
                        [&config](uint32_t, const CsrMatrix& x, std::span<const int8_t> s) {
                          CcdResult r = solve_ccd(x, s, config.ccd);
                          SolveResult out;
                          out.w = std::move(r.w);
                          out.objective = r.objective;
                          out.iters = r.outer_iters;
                          out.converged = r.converged;
                          return out;
                        });
}

double cross_validate_lambda(const Dataset& data, const TrainConfig& config,
                             std::span<const double> lambda_grid) {
  if (lambda_grid.empty()) throw NumericalError("empty lambda grid");
  constexpr int kFolds = 5;
  const size_t n = data.n_instances();
  if (n < kFolds) throw DataError("too few instances for 5-fold cross-validation");

  double best_lambda = lambda_grid[0];
  double best_score = -1.0;
  for (double lambda : lambda_grid) {
    double hits = 0.0;
    size_t scored = 0;
    for (int fold = 0; fold < kFolds; ++fold) {
      Dataset train, held;
      train.n_features = held.n_features = data.n_features;
      train.n_labels = held.n_labels = data.n_labels;
      for (size_t i = 0; i < n; ++i) {
        Dataset& dst = (i % kFolds == static_cast<size_t>(fold)) ? held : train;
        dst.rows.push_back(data.rows[i]);
        dst.labels.push_back(data.labels[i]);
      }

      TrainConfig fold_config = config;
      fold_config.prox.lambda = lambda;
      fold_config.ccd.lambda = lambda;
      Model model = train_all(train, fold_config);

      auto preds = predict_topk(model, held, 1, config.threads);
      for (size_t i = 0; i < held.n_instances(); ++i) {
        if (held.labels[i].empty()) continue;
        ++scored;
        uint32_t top = preds[i].entries[0].label;
        if (std::binary_search(held.labels[i].begin(), held.labels[i].end(), top)) hits += 1.0;
      }
    }
    double score = scored > 0 ? hits / static_cast<double>(scored) : 0.0;
    if (score > best_score) {
      best_score = score;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace proxml

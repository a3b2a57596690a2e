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
#ifndef PROXML_TRAINER_HPP_
#define PROXML_TRAINER_HPP_

#include <functional>
#include <span>

#include "proxml/ccd.hpp"
#include "proxml/dataset.hpp"
#include "proxml/model.hpp"
#include "proxml/prox.hpp"

namespace proxml {

struct TrainConfig {
  SolverKind solver = SolverKind::kProx;
  ProxConfig prox;
  CcdConfig ccd;
  bool add_bias = true;
  bool l2_normalize = false;
  int threads = 1;

  void validate() const;
};

// Trains one binary problem per label over a shared immutable dataset.
// Labels are dispatched to workers through an atomic cursor, biggest
// (most positives) first; results land in pre-sized per-label slots, so
// the model is bitwise identical for any thread count. A label whose
// solve throws is zeroed and flagged instead of aborting the run.
Model train_all(const Dataset& data, const TrainConfig& config);

// Test seam: same orchestration with a caller-supplied per-label solver.
using LabelSolveFn =
    std::function<SolveResult(uint32_t label_id, const CsrMatrix& x, std::span<const int8_t> s)>;
Model train_all_with(const Dataset& data, const TrainConfig& config, const LabelSolveFn& solve);

// 5-fold instance-level cross-validation on vanilla precision@1 over a
// lambda grid; returns the winning lambda (ties go to the earlier grid
// entry).
double cross_validate_lambda(const Dataset& data, const TrainConfig& config,
                             std::span<const double> lambda_grid);

}  // namespace proxml

#endif  // PROXML_TRAINER_HPP_

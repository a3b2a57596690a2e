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
#ifndef PROXML_CCD_HPP_
#define PROXML_CCD_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "proxml/dataset.hpp"
#include "proxml/prox.hpp"
#include "proxml/sparse.hpp"

namespace proxml {

// Cyclic coordinate descent on the same L1-regularized squared-hinge
// objective, with the shrinking heuristic that temporarily removes
// zero-valued coordinates whose partial gradient sits inside a band around
// the optimality interval. Serves as the comparator for the certification
// harness.

struct CcdConfig {
  double lambda = 0.1;
  int max_outer_iters = 100;
  double tol = 1e-3;  // on the max per-coordinate optimality violation
  bool shrinking_enabled = true;
  // Apply the band exactly as printed, [-lambda+M, -lambda-M], which is
  // empty for M > 0, instead of the symmetric [-lambda+M, lambda-M].
  bool literal_shrink_band = false;

  void validate() const;
};

struct CcdResult {
  SparseVector w;
  double objective = 0.0;
  int outer_iters = 0;
  size_t shrunk_count = 0;  // coordinates removed by the heuristic at termination
  bool converged = false;
  double max_violation = 0.0;
};

// Violation of the per-coordinate optimality condition:
//   |g + lambda|                       if w_j > 0
//   |g - lambda|                       if w_j < 0
//   max(g - lambda, -lambda - g, 0)    if w_j = 0
double coordinate_violation(double w_j, double partial_grad, double lambda);

// Exact minimizer of the objective restricted to one coordinate:
//   argmin_z lambda*|z| + sum_i max(c_i - d_i z, 0)^2
// The function is a convex piecewise quadratic; the minimizing piece is
// found by sweeping the sorted breakpoints c_i/d_i.
double minimize_coordinate(std::span<const double> c, std::span<const double> d, double lambda);

struct CcdState {
  std::vector<double> w;
  std::vector<double> margins;   // b_i = 1 - s_i <w, x_i>, kept incrementally
  std::vector<uint8_t> shrunk;
  double prev_max_violation = 0.0;  // feeds M; +inf disables shrinking for a sweep
  CcdState(uint32_t dim, uint32_t n_rows);
};

struct SweepStats {
  double max_violation = 0.0;
  size_t shrunk_active = 0;  // coordinates skipped as shrunk during this sweep
  size_t updated = 0;        // coordinates whose value changed
};

// One cyclic pass over all unshrunk coordinates in ascending index order.
// `cols` is the feature-major transpose of the instance matrix.
SweepStats ccd_sweep(CcdState& state, const CsrMatrix& cols, std::span<const int8_t> s,
                     const CcdConfig& config);

CcdResult solve_ccd(const CsrMatrix& x, std::span<const int8_t> s, const CcdConfig& config);
CcdResult solve_ccd(const Dataset& data, std::span<const int8_t> s, const CcdConfig& config);

struct CertifyRecord {
  uint32_t label_id = 0;
  uint32_t n_pos = 0;
  double opt_prox = 0.0;
  double opt_ccd = 0.0;
  double gap = 0.0;  // opt_ccd - opt_prox; positive means CCD under-converged
};

// Runs both solvers on one label and scores both final iterates with the
// shared objective evaluator.
CertifyRecord certify(const Dataset& data, uint32_t label_id, double lambda,
                      const ProxConfig& prox_cfg, const CcdConfig& ccd_cfg);

// Same comparison against a prebuilt instance matrix and sign vector;
// used when sweeping many labels.
CertifyRecord certify(const CsrMatrix& x, std::span<const int8_t> s, uint32_t label_id,
                      uint32_t n_pos, double lambda, const ProxConfig& prox_cfg,
                      const CcdConfig& ccd_cfg);

}  // namespace proxml

#endif  // PROXML_CCD_HPP_

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
#include "proxml/ccd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "proxml/errors.hpp"
#include "proxml/objective.hpp"

namespace proxml {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void CcdConfig::validate() const {
  if (lambda < 0.0) throw NumericalError("lambda must be >= 0");
  if (max_outer_iters <= 0) throw NumericalError("max_outer_iters must be positive");
  if (tol <= 0.0) throw NumericalError("tol must be positive");
}

double coordinate_violation(double w_j, double partial_grad, double lambda) {
  if (w_j > 0.0) return std::fabs(partial_grad + lambda);
  if (w_j < 0.0) return std::fabs(partial_grad - lambda);
  return std::max({partial_grad - lambda, -lambda - partial_grad, 0.0});
}

double minimize_coordinate(std::span<const double> c, std::span<const double> d, double lambda) {
  // f(z) = lambda*|z| + sum_i max(c_i - d_i z, 0)^2. Instance i is active
  // on z < c_i/d_i when d_i > 0 and on z > c_i/d_i when d_i < 0, so f is
  // quadratic between consecutive breakpoints and C^1 except at z = 0.
  const size_t m = c.size();

  struct Event {
    double z;
    double dd;  // d_i^2 delta with sign: negative = leaves, positive = enters
    double cd;
  };
  // Hot path of every sweep; the buffer is reused across calls.
  static thread_local std::vector<Event> events;
  events.clear();
  events.reserve(m + 1);
  double quad = 0.0, lin = 0.0;  // A = sum d_i^2, B = sum c_i d_i over active set
  for (size_t i = 0; i < m; ++i) {
    if (d[i] == 0.0) continue;
    double t = c[i] / d[i];
    if (d[i] > 0.0) {
      quad += d[i] * d[i];  // active at z -> -inf
      lin += c[i] * d[i];
      events.push_back({t, -d[i] * d[i], -c[i] * d[i]});
    } else {
      events.push_back({t, d[i] * d[i], c[i] * d[i]});
    }
  }
  events.push_back({0.0, 0.0, 0.0});  // L1 kink
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.z < b.z; });

  double lo = -kInf;
  double sign_slope = -lambda;  // d/dz of lambda*|z| left of zero
  for (size_t k = 0; k <= events.size(); ++k) {
    double hi = k < events.size() ? events[k].z : kInf;
    if (lo >= 0.0) sign_slope = lambda;
    if (hi > lo) {
      // derivative f'(z) = 2*quad*z - 2*lin + sign_slope on (lo, hi)
      double deriv_lo = std::isinf(lo) ? (quad > 0.0 ? -kInf : -2.0 * lin + sign_slope)
                                       : 2.0 * quad * lo - 2.0 * lin + sign_slope;
      if (deriv_lo >= 0.0 && !std::isinf(lo)) return lo;
      double deriv_hi = std::isinf(hi) ? (quad > 0.0 ? kInf : -2.0 * lin + sign_slope)
                                       : 2.0 * quad * hi - 2.0 * lin + sign_slope;
      if (deriv_hi > 0.0) {
        if (quad <= 0.0) return std::isinf(lo) ? hi : lo;  // linear piece turning upward
        double z = (2.0 * lin - sign_slope) / (2.0 * quad);
        if (!std::isinf(lo)) z = std::max(z, lo);
        if (!std::isinf(hi)) z = std::min(z, hi);
        return z;
      }
    }
    if (k < events.size()) {
      quad += events[k].dd;
      lin += events[k].cd;
      lo = events[k].z;
    }
  }
  return 0.0;  // f non-increasing everywhere can only happen for empty input
}

CcdState::CcdState(uint32_t dim, uint32_t n_rows)
    : w(dim, 0.0), margins(n_rows, 1.0), shrunk(dim, 0), prev_max_violation(kInf) {}

SweepStats ccd_sweep(CcdState& state, const CsrMatrix& cols, std::span<const int8_t> s,
                     const CcdConfig& config) {
  const uint32_t dim = cols.n_rows;
  const double n = static_cast<double>(state.margins.size());
  const double lambda = config.lambda;
  const double band = std::isinf(state.prev_max_violation)
                          ? kInf
                          : state.prev_max_violation / std::max(n, 1.0);

  SweepStats stats;
  std::vector<double> c_buf, d_buf;
  for (uint32_t j = 0; j < dim; ++j) {
    if (state.shrunk[j]) {
      ++stats.shrunk_active;
      continue;
    }
    auto rows = cols.row_indices(j);
    auto vals = cols.row_values(j);

    double grad = 0.0;
    for (size_t k = 0; k < rows.size(); ++k) {
      double b = state.margins[rows[k]];
      if (b > 0.0) grad += -2.0 * static_cast<double>(s[rows[k]]) * vals[k] * b;
    }

    stats.max_violation = std::max(stats.max_violation,
                                   coordinate_violation(state.w[j], grad, lambda));

    if (config.shrinking_enabled && state.w[j] == 0.0 && !std::isinf(band)) {
      bool inside = config.literal_shrink_band
                        ? (-lambda + band <= grad && grad <= -lambda - band)
                        : (-lambda + band <= grad && grad <= lambda - band);
      if (inside) {
        state.shrunk[j] = 1;
        ++stats.shrunk_active;
        continue;
      }
    }

    c_buf.resize(rows.size());
    d_buf.resize(rows.size());
    for (size_t k = 0; k < rows.size(); ++k) {
      d_buf[k] = static_cast<double>(s[rows[k]]) * vals[k];
      c_buf[k] = state.margins[rows[k]] + d_buf[k] * state.w[j];
    }
    double z = minimize_coordinate(c_buf, d_buf, lambda);
    if (z != state.w[j]) {
      for (size_t k = 0; k < rows.size(); ++k)
        state.margins[rows[k]] = c_buf[k] - d_buf[k] * z;
      state.w[j] = z;
      ++stats.updated;
    }
  }
  state.prev_max_violation = stats.max_violation;
  return stats;
}

CcdResult solve_ccd(const CsrMatrix& x, std::span<const int8_t> s, const CcdConfig& config) {
  config.validate();
  CcdState state(x.n_cols, x.n_rows);
  CsrMatrix cols = x.transpose();

  CcdResult result;
  bool reprieve_done = false;
  for (int outer = 0; outer < config.max_outer_iters; ++outer) {
    SweepStats stats = ccd_sweep(state, cols, s, config);
    result.outer_iters = outer + 1;
    result.max_violation = stats.max_violation;
    result.shrunk_count = stats.shrunk_active;

    // Incremental margins drift; refresh from scratch between sweeps.
    compute_margins(state.w, x, s, state.margins);

    if (stats.max_violation < config.tol) {
      bool any_shrunk = std::any_of(state.shrunk.begin(), state.shrunk.end(),
                                    [](uint8_t f) { return f != 0; });
      if (any_shrunk && !reprieve_done && outer + 1 < config.max_outer_iters) {
        // Shrunk coordinates get exactly one full pass before we stop.
        reprieve_done = true;
        std::fill(state.shrunk.begin(), state.shrunk.end(), 0);
        CcdConfig no_shrink = config;
        no_shrink.shrinking_enabled = false;
        SweepStats final_stats = ccd_sweep(state, cols, s, no_shrink);
        compute_margins(state.w, x, s, state.margins);
        result.outer_iters = outer + 2;
        result.max_violation = final_stats.max_violation;
        result.converged = final_stats.max_violation < config.tol;
        break;
      }
      result.converged = true;
      result.shrunk_count = stats.shrunk_active;
      break;
    }
  }

  result.objective = eval_objective(state.w, x, s, config.lambda);
  result.w = SparseVector::from_dense(state.w);
  return result;
}

CcdResult solve_ccd(const Dataset& data, std::span<const int8_t> s, const CcdConfig& config) {
  auto x = CsrMatrix::from_rows(data.rows, data.n_features);
  return solve_ccd(x, s, config);
}

CertifyRecord certify(const CsrMatrix& x, std::span<const int8_t> s, uint32_t label_id,
                      uint32_t n_pos, double lambda, const ProxConfig& prox_cfg,
                      const CcdConfig& ccd_cfg) {
  ProxConfig pc = prox_cfg;
  pc.lambda = lambda;
  CcdConfig cc = ccd_cfg;
  cc.lambda = lambda;

  SolveResult prox = solve_prox(x, s, pc);
  CcdResult ccd = solve_ccd(x, s, cc);

  std::vector<double> dense(x.n_cols, 0.0);
  CertifyRecord record;
  record.label_id = label_id;
  record.n_pos = n_pos;
  prox.w.to_dense(dense);
  record.opt_prox = eval_objective(dense, x, s, lambda);
  ccd.w.to_dense(dense);
  record.opt_ccd = eval_objective(dense, x, s, lambda);
  record.gap = record.opt_ccd - record.opt_prox;
  return record;
}

CertifyRecord certify(const Dataset& data, uint32_t label_id, double lambda,
                      const ProxConfig& prox_cfg, const CcdConfig& ccd_cfg) {
  auto x = CsrMatrix::from_rows(data.rows, data.n_features);
  LabelView view = label_view(data, label_id);
  auto s = sign_vector(data, view.positives);
  return certify(x, s, label_id, static_cast<uint32_t>(view.n_pos()), lambda, prox_cfg, ccd_cfg);
}

}  // namespace proxml

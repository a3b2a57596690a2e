#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "proxml/errors.hpp"
#include "proxml/objective.hpp"
#include "proxml/prox.hpp"

using namespace proxml;

namespace {

CsrMatrix to_csr(const oracle::TinyProblem& p) {
  std::vector<SparseVector> rows;
  for (const auto& dense : p.rows) rows.push_back(SparseVector::from_dense(dense));
  return CsrMatrix::from_rows(rows, static_cast<uint32_t>(p.dim()));
}

CsrMatrix single_row(std::vector<double> x) {
  std::vector<SparseVector> rows{SparseVector::from_dense(x)};
  return CsrMatrix::from_rows(rows, static_cast<uint32_t>(x.size()));
}

}  // namespace

TEST_CASE("loss at w = 0 is the instance count with everything active") {
  std::mt19937 rng(3);
  auto p = oracle::random_problem(rng, 17, 6);
  auto x = to_csr(p);
  std::vector<double> w(6, 0.0);
  std::vector<uint32_t> active;
  double loss = squared_hinge_loss(w, x, p.signs, &active);
  CHECK(loss == doctest::Approx(17.0));
  CHECK(active.size() == 17);
}

TEST_CASE("confident correct margin contributes no loss") {
  auto x = single_row({1.0, 0.0});
  std::vector<int8_t> s{1};
  std::vector<double> w{2.0, 0.0};
  std::vector<uint32_t> active;
  CHECK(squared_hinge_loss(w, x, s, &active) == 0.0);
  CHECK(active.empty());
}

TEST_CASE("wrong-signed margin is squared") {
  auto x = single_row({1.0, 0.0});
  std::vector<int8_t> s{-1};
  std::vector<double> w{1.0, 0.0};
  CHECK(squared_hinge_loss(w, x, s) == doctest::Approx(4.0));  // b = 2
}

TEST_CASE("gradient is zero off the active set") {
  auto x = single_row({1.0, 0.0});
  std::vector<int8_t> s{1};
  std::vector<double> w{2.0, 0.0}, grad(2);
  squared_hinge_grad(w, x, s, grad);
  CHECK(grad[0] == 0.0);
  CHECK(grad[1] == 0.0);
}

TEST_CASE("gradient at zero of a single positive instance") {
  auto x = single_row({1.0, 0.0});
  std::vector<int8_t> s{1};
  std::vector<double> w{0.0, 0.0}, grad(2);
  squared_hinge_grad(w, x, s, grad);
  CHECK(grad[0] == doctest::Approx(-2.0));
  CHECK(grad[1] == 0.0);
}

TEST_CASE("gradient matches central finite differences at smooth points") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    auto p = oracle::random_problem(rng, 5, 4);
    auto x = to_csr(p);
    std::vector<double> w(4);
    for (auto& v : w) v = coord(rng);

    std::vector<double> margins(5);
    compute_margins(w, x, p.signs, margins);
    bool smooth = true;
    for (double b : margins)
      if (std::fabs(b) < 1e-6) smooth = false;
    if (!smooth) continue;
    ++checked;

    std::vector<double> grad(4);
    squared_hinge_grad(w, x, p.signs, grad);
    auto fd = oracle::fd_gradient(p, w);
    double err = 0.0, scale = 0.0;
    for (size_t j = 0; j < 4; ++j) {
      err += (grad[j] - fd[j]) * (grad[j] - fd[j]);
      scale += fd[j] * fd[j];
    }
    CHECK(std::sqrt(err) <= 1e-5 * std::max(1.0, std::sqrt(scale)));
  }
}

TEST_CASE("soft threshold spot values") {
  CHECK(soft_threshold(0.5, 0.1) == doctest::Approx(0.4));
  CHECK(soft_threshold(-0.05, 0.1) == 0.0);
  CHECK(soft_threshold(-2.0, 0.5) == doctest::Approx(-1.5));
}

TEST_CASE("soft threshold equals the documented coarse grid oracle") {
  double grid = oracle::prox_1d_grid(-2.0, 0.5, -4.0, 4.0, 1e-4);
  CHECK(std::fabs(grid - soft_threshold(-2.0, 0.5)) <= 2e-4);
}

TEST_CASE("soft threshold matches the refined brute-force minimizer") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u_dist(-3.0, 3.0), t_dist(0.0, 2.0);
  for (int rep = 0; rep < 500; ++rep) {
    double u = u_dist(rng), thr = t_dist(rng);
    CHECK(std::fabs(soft_threshold(u, thr) - oracle::prox_1d_refined(u, thr)) <= 1e-9);
  }
}

TEST_CASE("vectorized soft threshold minimizes per coordinate") {
  std::vector<double> u{0.5, -0.05, -2.0}, out(3);
  soft_threshold(u, 0.1, out);
  CHECK(out[0] == doctest::Approx(0.4));
  CHECK(out[1] == 0.0);
  CHECK(out[2] == doctest::Approx(-1.9));
}

TEST_CASE("line search keeps an already-valid step") {
  std::mt19937 rng(5);
  auto p = oracle::random_problem(rng, 8, 3);
  auto x = to_csr(p);
  std::vector<double> w(3, 0.0), grad(3);
  double loss = squared_hinge_loss(w, x, p.signs);
  squared_hinge_grad(w, x, p.signs, grad);
  auto r = line_search(w, grad, loss, x, p.signs, 0.1, 1e-4, 0.5);
  CHECK(r.gamma == doctest::Approx(1e-4));
}

TEST_CASE("line search backtracks a huge step to a verified one") {
  std::mt19937 rng(6);
  auto p = oracle::random_problem(rng, 12, 4);
  auto x = to_csr(p);
  std::vector<double> w(4, 0.0), grad(4);
  double loss = squared_hinge_loss(w, x, p.signs);
  squared_hinge_grad(w, x, p.signs, grad);
  auto r = line_search(w, grad, loss, x, p.signs, 0.1, 1e6, 0.5);
  CHECK(r.gamma < 1e6);

  // re-derive both sides of the accepted inequality
  double lhs = squared_hinge_loss(r.candidate, x, p.signs);
  double linear = 0.0, dist_sq = 0.0;
  for (size_t j = 0; j < 4; ++j) {
    double delta = r.candidate[j] - w[j];
    linear += grad[j] * delta;
    dist_sq += delta * delta;
  }
  CHECK(lhs <= loss + linear + dist_sq / (2.0 * r.gamma) + 1e-9);
  CHECK(lhs == doctest::Approx(r.candidate_loss));
}

TEST_CASE("separated problem passes the start step and prox-maps the iterate") {
  auto x = single_row({1.0});
  std::vector<int8_t> s{1};
  std::vector<double> w{2.0}, grad{0.0};
  auto r = line_search(w, grad, 0.0, x, s, 0.3, 1.0, 0.5);
  CHECK(r.gamma == doctest::Approx(1.0));
  CHECK(r.candidate[0] == doctest::Approx(soft_threshold(2.0, 0.3)));
}

TEST_CASE("line search underflow raises a numerical error") {
  // A loss reporting a fake low value forces endless backtracking.
  auto x = single_row({1.0});
  std::vector<int8_t> s{1};
  std::vector<double> w{0.0}, grad{1e9};
  CHECK_THROWS_AS(line_search(w, grad, -1e18, x, s, 0.0, 1.0, 0.5), NumericalError);
}

TEST_CASE("a large enough lambda yields the exact zero vector") {
  std::mt19937 rng(21);
  auto p = oracle::random_problem(rng, 15, 5);
  auto x = to_csr(p);
  std::vector<double> w0(5, 0.0), grad(5);
  squared_hinge_grad(w0, x, p.signs, grad);
  double gmax = 0.0;
  for (double g : grad) gmax = std::max(gmax, std::fabs(g));

  ProxConfig config;
  config.lambda = gmax * 1.01;
  SolveResult r = solve_prox(x, p.signs, config);
  CHECK(r.w.nnz() == 0);
  CHECK(r.converged);
  CHECK(r.objective == doctest::Approx(15.0));
}

TEST_CASE("symmetric pull keeps the one-dimensional solution at zero") {
  std::vector<SparseVector> rows{SparseVector::from_dense(std::vector<double>{1.0}),
                                 SparseVector::from_dense(std::vector<double>{1.0})};
  auto x = CsrMatrix::from_rows(rows, 1);
  std::vector<int8_t> s{1, -1};
  for (double lambda : {0.0, 0.1, 1.0}) {
    ProxConfig config;
    config.lambda = lambda;
    SolveResult r = solve_prox(x, s, config);
    CHECK(r.w.nnz() == 0);
    CHECK(r.objective == doctest::Approx(2.0));
  }
}

TEST_CASE("objective agrees with a slow generic oracle on a random problem") {
  std::mt19937 rng(31);
  auto p = oracle::random_problem(rng, 20, 5, 0.9);
  auto x = to_csr(p);

  ProxConfig config;
  config.lambda = 0.1;
  config.tol = 1e-13;
  config.max_iters = 50000;
  SolveResult r = solve_prox(x, p.signs, config);

  double reference = oracle::subgradient_solve(p, 0.1);
  CHECK(std::fabs(r.objective - reference) <= 1e-6);
}

TEST_CASE("accepted steps never increase the objective") {
  std::mt19937 rng(47);
  for (int rep = 0; rep < 100; ++rep) {
    auto p = oracle::random_problem(rng, 10, 6);
    auto x = to_csr(p);
    ProxConfig config;
    config.lambda = 0.05;
    config.max_iters = 120;
    config.tol = 1e-9;
    SolveResult r = solve_prox(x, p.signs, config);
    for (size_t t = 1; t < r.objective_trace.size(); ++t)
      CHECK(r.objective_trace[t] <= r.objective_trace[t - 1] + 1e-10);
  }
}

TEST_CASE("the trace tracks the true objective of the final iterate") {
  std::mt19937 rng(53);
  auto p = oracle::random_problem(rng, 12, 4);
  auto x = to_csr(p);
  ProxConfig config;
  config.lambda = 0.2;
  SolveResult r = solve_prox(x, p.signs, config);
  std::vector<double> dense(4, 0.0);
  r.w.to_dense(dense);
  CHECK(eval_objective(dense, x, p.signs, 0.2) == doctest::Approx(r.objective).epsilon(1e-12));
  CHECK(r.objective_trace.back() == doctest::Approx(r.objective));
}

TEST_CASE("all-zero rows leave the solution at zero with objective N") {
  std::vector<SparseVector> rows(7, SparseVector(4));
  auto x = CsrMatrix::from_rows(rows, 4);
  std::vector<int8_t> s(7, 1);
  s[2] = -1;
  ProxConfig config;
  config.lambda = 0.01;
  SolveResult r = solve_prox(x, s, config);
  CHECK(r.w.nnz() == 0);
  CHECK(r.objective == doctest::Approx(7.0));
}

TEST_CASE("stronger regularization does not densify the solution") {
  std::mt19937 rng(61);
  auto p = oracle::random_problem(rng, 30, 10, 0.8);
  auto x = to_csr(p);

  std::vector<size_t> nnz;
  double lambda = 0.01;
  for (int step = 0; step < 10; ++step, lambda *= 2.0) {
    ProxConfig config;
    config.lambda = lambda;
    config.tol = 1e-10;
    config.max_iters = 5000;
    nnz.push_back(solve_prox(x, p.signs, config).w.nnz());
  }
  int inversions = 0;
  for (size_t i = 1; i < nnz.size(); ++i)
    if (nnz[i] > nnz[i - 1]) ++inversions;
  CHECK(inversions <= 1);
}

TEST_CASE("solver rejects invalid configurations") {
  ProxConfig config;
  config.lambda = -1.0;
  std::vector<SparseVector> rows{SparseVector(1)};
  auto x = CsrMatrix::from_rows(rows, 1);
  std::vector<int8_t> s{1};
  CHECK_THROWS_AS(solve_prox(x, s, config), NumericalError);
}

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
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "proxml/ccd.hpp"
#include "proxml/dataset.hpp"
#include "proxml/errors.hpp"
#include "proxml/labelgraph.hpp"
#include "proxml/metrics.hpp"
#include "proxml/model.hpp"
#include "proxml/predictor.hpp"
#include "proxml/prox.hpp"
#include "proxml/trainer.hpp"

namespace {

using namespace proxml;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

int default_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Every artifact starts with its effective configuration so a file is
// traceable to the exact invocation that produced it.
void write_header(std::ostream& out, const std::string& command,
                  const std::vector<std::pair<std::string, std::string>>& kv) {
  out << "# proxml " << command << "\n";
  for (const auto& [key, value] : kv) out << "# " << key << "=" << value << "\n";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<size_t> parse_k_list(const std::string& text) {
  std::vector<size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    long v = std::stol(item);
    if (v < 1) throw DataError("k values must be >= 1");
    out.push_back(static_cast<size_t>(v));
  }
  if (out.empty()) throw DataError("empty k list");
  return out;
}

struct TrainArgs {
  std::string data_path, out_path, log_path;
  std::string solver = "prox";
  double lambda = 0.1;
  double tol = 0.0;  // 0 keeps the solver default
  int max_iters = 0;
  bool bias = true;
  bool l2_normalize = false;
  bool no_shrinking = false;
  bool strict = false;
  std::string cv_grid;
  int threads = default_threads();
};

int run_train(const TrainArgs& args) {
  Dataset data = parse_xmc_file(args.data_path);
  if (data.n_empty_rows > 0 || data.n_unlabeled_rows > 0)
    std::cout << "note: " << data.n_empty_rows << " instances with no features, "
              << data.n_unlabeled_rows << " with no positive labels\n";

  TrainConfig config;
  config.solver = args.solver == "ccd" ? SolverKind::kCcd : SolverKind::kProx;
  config.add_bias = args.bias;
  config.l2_normalize = args.l2_normalize;
  config.threads = args.threads;
  config.prox.lambda = args.lambda;
  config.ccd.lambda = args.lambda;
  config.ccd.shrinking_enabled = !args.no_shrinking;
  if (args.tol > 0) {
    config.prox.tol = args.tol;
    config.ccd.tol = args.tol;
  }
  if (args.max_iters > 0) {
    config.prox.max_iters = args.max_iters;
    config.ccd.max_outer_iters = args.max_iters;
  }

  double lambda = args.lambda;
  if (!args.cv_grid.empty()) {
    auto grid = parse_double_list(args.cv_grid);
    lambda = cross_validate_lambda(data, config, grid);
    config.prox.lambda = lambda;
    config.ccd.lambda = lambda;
    std::cout << "cross-validated lambda: " << format_double(lambda) << "\n";
  }

  Model model = train_all(data, config);
  save_model(model, args.out_path);

  size_t failed = 0, unconverged = 0, skipped = 0;
  for (const auto& st : model.stats) {
    if (st.status == LabelStatus::kFailed) ++failed;
    if (st.status == LabelStatus::kSkippedNoPositives) ++skipped;
    if (st.status == LabelStatus::kTrained && !st.converged) ++unconverged;
  }
  std::cout << "trained " << model.n_labels << " labels (" << skipped << " skipped, " << failed
            << " failed, " << unconverged << " unconverged) in "
            << format_double(model.train_seconds) << "s, nnz=" << model.total_nnz() << "\n";

  if (!args.log_path.empty()) {
    std::ofstream log(args.log_path, std::ios::trunc);
    if (!log) throw DataError("cannot open training log '" + args.log_path + "'");
    write_header(log, "train",
                 {{"data", args.data_path},
                  {"solver", args.solver},
                  {"lambda", format_double(lambda)},
                  {"bias", args.bias ? "1" : "0"},
                  {"l2_normalize_rows", args.l2_normalize ? "1" : "0"},
                  {"threads", std::to_string(args.threads)}});
    write_train_log(model, log);
  }

  if (args.strict && (failed > 0 || unconverged > 0))
    throw NumericalError(std::to_string(failed) + " labels failed, " +
                         std::to_string(unconverged) + " unconverged (strict mode)");
  return 0;
}

struct PredictArgs {
  std::string model_path, data_path, out_path, latency_log;
  size_t k = 5;
  int threads = default_threads();
};

int run_predict(const PredictArgs& args) {
  Model model = load_model(args.model_path);
  Dataset data = parse_xmc_file(args.data_path);
  if (data.n_features != model.n_raw_features)
    throw DataError("test set has D=" + std::to_string(data.n_features) +
                    " but the model was trained with D=" + std::to_string(model.n_raw_features));

  std::vector<double> latency_ms;
  auto preds = predict_topk(model, data, std::min<size_t>(args.k, model.n_labels), args.threads,
                            &latency_ms);

  std::ofstream out(args.out_path, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot open prediction output '" + args.out_path + "'");
  write_predictions(preds, out);

  if (!args.latency_log.empty()) {
    std::ofstream log(args.latency_log, std::ios::trunc);
    if (!log) throw DataError("cannot open latency log '" + args.latency_log + "'");
    log << "instance,milliseconds\n";
    for (size_t i = 0; i < latency_ms.size(); ++i)
      log << i << ',' << format_double(latency_ms[i]) << "\n";
  }

  double mean_ms = 0.0;
  for (double ms : latency_ms) mean_ms += ms;
  if (!latency_ms.empty()) mean_ms /= static_cast<double>(latency_ms.size());
  std::cerr << "predicted " << data.n_instances() << " instances, mean "
            << format_double(mean_ms) << " ms/instance\n";
  return 0;
}

struct EvalArgs {
  std::string gold_path, pred_path, train_path, out_path;
  std::string k_list = "1,3,5";
  double a = 0.55, b = 1.5;
  bool full = false;
  int threads = default_threads();
};

std::string metric_cell(const MetricValue& v) {
  return v.normalized ? format_double(*v.normalized) : std::string("N/A");
}

int run_eval(const EvalArgs& args) {
  Dataset gold = parse_xmc_file(args.gold_path);
  auto preds = read_predictions_file(args.pred_path);
  if (preds.size() != gold.n_instances())
    throw DataError("prediction file has " + std::to_string(preds.size()) + " lines but gold has " +
                    std::to_string(gold.n_instances()) + " instances");

  Dataset train = parse_xmc_file(args.train_path);
  if (train.n_labels != gold.n_labels)
    throw DataError("train and gold label spaces differ (" + std::to_string(train.n_labels) +
                    " vs " + std::to_string(gold.n_labels) + ")");
  auto counts = label_counts(train);
  PropensityTable table = propensities(counts, args.a, args.b, train.n_instances());

  auto ks = parse_k_list(args.k_list);
  EvalReport report = evaluate(preds, gold.labels, table, ks, args.threads);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!args.out_path.empty() && args.out_path != "-") {
    file.open(args.out_path, std::ios::trunc);
    if (!file) throw DataError("cannot open eval output '" + args.out_path + "'");
    out = &file;
  }
  write_header(*out, "eval",
               {{"gold", args.gold_path},
                {"pred", args.pred_path},
                {"train", args.train_path},
                {"propensity_a", format_double(args.a)},
                {"propensity_b", format_double(args.b)},
                {"k", args.k_list}});
  *out << "metric,k,value\n";
  auto emit = [&](const char* name, const std::vector<MetricValue>& vals) {
    for (size_t ki = 0; ki < report.ks.size(); ++ki)
      *out << name << ',' << report.ks[ki] << ',' << metric_cell(vals[ki]) << "\n";
  };
  emit("P", report.p);
  emit("nDCG", report.ndcg);
  emit("PSP", report.psp);
  emit("PSnDCG", report.psndcg);
  if (args.full) {
    auto emit_raw = [&](const char* name, const std::vector<MetricValue>& vals) {
      for (size_t ki = 0; ki < report.ks.size(); ++ki)
        *out << name << ',' << report.ks[ki] << ',' << format_double(vals[ki].raw_mean) << "\n";
    };
    emit_raw("P_raw", report.p);
    emit_raw("nDCG_raw", report.ndcg);
    emit_raw("PSP_raw", report.psp);
    emit_raw("PSnDCG_raw", report.psndcg);
    for (size_t ki = 0; ki < report.ks.size(); ++ki)
      *out << "coverage," << report.ks[ki] << ',' << format_double(report.coverage[ki]) << "\n";
    *out << "empty_truth_instances,," << report.n_empty_truth << "\n";
  }

  // Human-readable table on stdout.
  std::printf("%-10s", "metric");
  for (size_t k : report.ks) std::printf("      @%zu", k);
  std::printf("\n");
  auto print_row = [&](const char* name, const std::vector<MetricValue>& vals) {
    std::printf("%-10s", name);
    for (size_t ki = 0; ki < report.ks.size(); ++ki) {
      if (vals[ki].normalized)
        std::printf("  %7.2f", *vals[ki].normalized);
      else
        std::printf("  %7s", "N/A");
    }
    std::printf("\n");
  };
  print_row("P", report.p);
  print_row("nDCG", report.ndcg);
  print_row("PSP", report.psp);
  print_row("PSnDCG", report.psndcg);
  std::printf("%-10s", "coverage");
  for (size_t ki = 0; ki < report.ks.size(); ++ki) std::printf("  %7.4f", report.coverage[ki]);
  std::printf("\n(%zu instances, %zu with empty ground truth)\n", report.n_instances,
              report.n_empty_truth);
  return 0;
}

struct CertifyArgs {
  std::string data_path, out_path, label_list;
  double lambda = 0.1;
  double prox_tol = 1e-7;
  int prox_max_iters = 2000;
  double ccd_tol = 0.5;
  int ccd_max_iters = 50;
  bool no_shrinking = false;
  bool literal_band = false;
  bool bias = true;
  bool l2_normalize = false;
  int threads = default_threads();
};

int run_certify(const CertifyArgs& args) {
  Dataset raw = parse_xmc_file(args.data_path);
  const Dataset* source = &raw;
  Dataset transformed;
  if (args.l2_normalize) {
    transformed = l2_normalize_rows(raw);
    source = &transformed;
  }
  if (args.bias) {
    transformed = augment_bias(*source);
    source = &transformed;
  }
  const Dataset& data = *source;

  ProxConfig prox_cfg;
  prox_cfg.tol = args.prox_tol;
  prox_cfg.max_iters = args.prox_max_iters;
  CcdConfig ccd_cfg;
  ccd_cfg.tol = args.ccd_tol;
  ccd_cfg.max_outer_iters = args.ccd_max_iters;
  ccd_cfg.shrinking_enabled = !args.no_shrinking;
  ccd_cfg.literal_shrink_band = args.literal_band;

  std::vector<uint32_t> label_ids;
  if (args.label_list.empty()) {
    label_ids.resize(data.n_labels);
    for (uint32_t l = 0; l < data.n_labels; ++l) label_ids[l] = l;
  } else {
    for (double v : parse_double_list(args.label_list))
      label_ids.push_back(static_cast<uint32_t>(v));
  }

  CsrMatrix x = CsrMatrix::from_rows(data.rows, data.n_features);
  LabelIndex index(data);
  std::vector<CertifyRecord> records(label_ids.size());
  std::vector<uint8_t> has_record(label_ids.size(), 0);

  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    std::vector<int8_t> signs(data.n_instances());
    while (true) {
      size_t slot = cursor.fetch_add(1, std::memory_order_relaxed);
      if (slot >= label_ids.size()) break;
      uint32_t label = label_ids[slot];
      if (label >= data.n_labels) continue;
      uint32_t n_pos = static_cast<uint32_t>(index.n_pos(label));
      if (n_pos == 0) continue;  // nothing to certify on an all-negative label
      std::fill(signs.begin(), signs.end(), int8_t{-1});
      for (uint32_t i : index.positives(label)) signs[i] = 1;
      records[slot] = certify(x, signs, label, n_pos, args.lambda, prox_cfg, ccd_cfg);
      has_record[slot] = 1;
    }
  };
  if (args.threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < args.threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!args.out_path.empty() && args.out_path != "-") {
    file.open(args.out_path, std::ios::trunc);
    if (!file) throw DataError("cannot open certify output '" + args.out_path + "'");
    out = &file;
  }
  write_header(*out, "certify",
               {{"data", args.data_path},
                {"lambda", format_double(args.lambda)},
                {"prox_tol", format_double(args.prox_tol)},
                {"ccd_tol", format_double(args.ccd_tol)},
                {"ccd_max_iters", std::to_string(args.ccd_max_iters)},
                {"shrinking", args.no_shrinking ? "0" : "1"},
                {"literal_band", args.literal_band ? "1" : "0"},
                {"bias", args.bias ? "1" : "0"}});
  *out << "label_id,n_pos,opt_prox,opt_ccd,gap\n";
  size_t certified = 0, prox_lower = 0;
  for (size_t i = 0; i < records.size(); ++i) {
    if (!has_record[i]) continue;
    const auto& r = records[i];
    *out << r.label_id << ',' << r.n_pos << ',' << format_double(r.opt_prox) << ','
         << format_double(r.opt_ccd) << ',' << format_double(r.gap) << "\n";
    ++certified;
    if (r.gap > 0.0) ++prox_lower;
  }
  std::cerr << "certified " << certified << " labels; opt_prox < opt_ccd on " << prox_lower << " ("
            << format_double(certified > 0 ? 100.0 * prox_lower / certified : 0.0) << "%)\n";
  return 0;
}

struct GraphArgs {
  std::string data_path, out_path;
  double tol = 1e-6;
  int max_iters = 0;
  bool largest_component = false;
};

int run_graph_stats(const GraphArgs& args) {
  Dataset data = parse_xmc_file(args.data_path);
  LabelGraph graph = build_graph(data);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!args.out_path.empty() && args.out_path != "-") {
    file.open(args.out_path, std::ios::trunc);
    if (!file) throw DataError("cannot open graph-stats output '" + args.out_path + "'");
    out = &file;
  }
  write_header(*out, "graph-stats",
               {{"data", args.data_path},
                {"tol", format_double(args.tol)},
                {"largest_component", args.largest_component ? "1" : "0"}});
  *out << "scope,n_labels,n_edges,n_isolated,n_components,lambda2,residual,iterations,converged\n";

  auto emit = [&](const char* scope, const LabelGraph& g) {
    SpectralResult r = algebraic_connectivity(g, args.tol, args.max_iters);
    *out << scope << ',' << g.n_vertices << ',' << g.n_edges() << ',' << g.isolated.size() << ','
         << r.component_count << ',' << format_double(r.lambda2) << ','
         << format_double(r.residual) << ',' << r.iterations << ',' << (r.converged ? 1 : 0)
         << "\n";
    if (!r.converged)
      std::cerr << "warning: eigensolver not converged (residual " << format_double(r.residual)
                << "), value is the best estimate\n";
  };
  emit("full", graph);
  if (args.largest_component) emit("largest_component", largest_component_subgraph(graph));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-vs-rest sparse linear extreme multi-label classification"};
  app.require_subcommand(1);
  app.set_config("--config");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a one-vs-rest sparse linear model");
  train->add_option("--data", train_args.data_path, "Training set (XMC text format)")->required();
  train->add_option("--out", train_args.out_path, "Output model file")->required();
  train->add_option("--solver", train_args.solver, "Solver: prox or ccd")
      ->check(CLI::IsMember({"prox", "ccd"}))
      ->capture_default_str();
  train->add_option("--lambda", train_args.lambda, "L1 regularization weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train->add_option("--tol", train_args.tol, "Solver tolerance (0 keeps the default)");
  train->add_option("--max-iters", train_args.max_iters, "Iteration cap (0 keeps the default)");
  train->add_flag("--bias,!--no-bias", train_args.bias, "Append a constant bias feature")
      ->capture_default_str();
  train->add_flag("--l2-normalize-rows", train_args.l2_normalize, "Scale rows to unit L2 norm");
  train->add_flag("--no-shrinking", train_args.no_shrinking, "Disable CCD shrinking heuristic");
  train->add_flag("--strict", train_args.strict, "Exit 3 on any label failure/non-convergence");
  train->add_option("--cv-lambda", train_args.cv_grid,
                    "Comma-separated lambda grid for 5-fold cross-validation on P@1");
  train->add_option("--log", train_args.log_path, "Per-label training log CSV");
  train->add_option("--threads", train_args.threads, "Worker threads")
      ->envname("PROXML_THREADS")
      ->capture_default_str();

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Score test instances and emit top-k labels");
  predict->add_option("--model", predict_args.model_path, "Model file")->required();
  predict->add_option("--data", predict_args.data_path, "Test set (XMC text format)")->required();
  predict->add_option("--out", predict_args.out_path, "Output predictions file")->required();
  predict->add_option("--k", predict_args.k, "Labels to emit per instance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  predict->add_option("--latency-log", predict_args.latency_log,
                      "CSV of per-instance prediction latency");
  predict->add_option("--threads", predict_args.threads, "Worker threads")
      ->envname("PROXML_THREADS")
      ->capture_default_str();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate predictions with ranking metrics");
  eval->add_option("--gold", eval_args.gold_path, "Ground-truth test set")->required();
  eval->add_option("--pred", eval_args.pred_path, "Predictions file")->required();
  eval->add_option("--train", eval_args.train_path,
                   "Training set; propensities use its label counts")
      ->required();
  eval->add_option("--k", eval_args.k_list, "Comma-separated k values")->capture_default_str();
  eval->add_option("--propensity-a", eval_args.a, "Propensity parameter A")
      ->capture_default_str();
  eval->add_option("--propensity-b", eval_args.b, "Propensity parameter B")
      ->capture_default_str();
  eval->add_option("--out", eval_args.out_path, "CSV output path ('-' for stdout)");
  eval->add_flag("--full", eval_args.full, "Also emit raw means, coverage, and empty-truth count");
  eval->add_option("--threads", eval_args.threads, "Worker threads")
      ->envname("PROXML_THREADS")
      ->capture_default_str();

  CertifyArgs certify_args;
  auto* cert = app.add_subcommand(
      "certify", "Compare per-label objectives reached by the prox and CCD solvers");
  cert->add_option("--data", certify_args.data_path, "Training set")->required();
  cert->add_option("--lambda", certify_args.lambda, "Shared L1 weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cert->add_option("--out", certify_args.out_path, "CSV output path ('-' for stdout)");
  cert->add_option("--labels", certify_args.label_list, "Comma-separated label subset");
  cert->add_option("--prox-tol", certify_args.prox_tol, "Prox solver tolerance")
      ->capture_default_str();
  cert->add_option("--prox-max-iters", certify_args.prox_max_iters, "Prox iteration cap")
      ->capture_default_str();
  cert->add_option("--ccd-tol", certify_args.ccd_tol, "CCD max-violation tolerance")
      ->capture_default_str();
  cert->add_option("--ccd-max-iters", certify_args.ccd_max_iters, "CCD sweep cap")
      ->capture_default_str();
  cert->add_flag("--no-shrinking", certify_args.no_shrinking, "Disable the shrinking heuristic");
  cert->add_flag("--literal-band", certify_args.literal_band,
                 "Use the as-printed (vacuous) shrink interval");
  cert->add_flag("--bias,!--no-bias", certify_args.bias, "Append a constant bias feature")
      ->capture_default_str();
  cert->add_flag("--l2-normalize-rows", certify_args.l2_normalize, "Scale rows to unit L2 norm");
  cert->add_option("--threads", certify_args.threads, "Worker threads")
      ->envname("PROXML_THREADS")
      ->capture_default_str();

  GraphArgs graph_args;
  auto* graph = app.add_subcommand("graph-stats",
                                   "Label co-occurrence graph statistics and connectivity");
  graph->add_option("--data", graph_args.data_path, "Training set")->required();
  graph->add_option("--out", graph_args.out_path, "CSV output path ('-' for stdout)");
  graph->add_option("--tol", graph_args.tol, "Eigensolver residual tolerance")
      ->capture_default_str();
  graph->add_option("--max-iters", graph_args.max_iters, "Iteration cap (0 = 10x labels)");
  graph->add_flag("--largest-component", graph_args.largest_component,
                  "Also restrict to the largest connected component");

  try {
    app.parse(argc, argv);
    if (*train) return run_train(train_args);
    if (*predict) return run_predict(predict_args);
    if (*eval) return run_eval(eval_args);
    if (*cert) return run_certify(certify_args);
    if (*graph) return run_graph_stats(graph_args);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ModelIoError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

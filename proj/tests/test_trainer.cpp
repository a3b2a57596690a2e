#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "proxml/errors.hpp"
#include "proxml/model.hpp"
#include "proxml/predictor.hpp"
#include "proxml/trainer.hpp"

using namespace proxml;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("proxml_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset synthetic_dataset(std::mt19937& rng, uint32_t n, uint32_t d, uint32_t l) {
  std::uniform_real_distribution<double> value(0.2, 1.5);
  std::uniform_int_distribution<uint32_t> lab(0, l - 1);
  Dataset data;
  data.n_features = d;
  data.n_labels = l;
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t label = lab(rng);
    std::vector<double> row(d, 0.0);
    row[label % d] = value(rng);
    row[(label * 3 + 1) % d] = value(rng);
    data.rows.push_back(SparseVector::from_dense(row));
    data.labels.push_back({label});
  }
  return data;
}

Model random_model(std::mt19937& rng, uint32_t d, uint32_t l) {
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Model m;
  m.n_raw_features = d;
  m.n_labels = l;
  m.has_bias = unit(rng) < 0.5;
  m.lambda = 0.25;
  m.solver = SolverKind::kProx;
  m.dataset_fingerprint = rng();
  uint32_t dim = m.weight_dim();
  for (uint32_t label = 0; label < l; ++label) {
    std::vector<double> dense(dim, 0.0);
    for (uint32_t j = 0; j < dim; ++j)
      if (unit(rng) < 0.3) dense[j] = value(rng);
    m.weights.push_back(SparseVector::from_dense(dense));
    LabelStats st;
    st.n_pos = static_cast<uint32_t>(rng() % 50);
    st.iters = static_cast<int>(rng() % 300);
    st.objective = unit(rng) * 10.0;
    st.nnz = m.weights.back().nnz();
    st.converged = unit(rng) < 0.8;
    m.stats.push_back(st);
  }
  return m;
}

bool persisted_equal(const Model& a, const Model& b) {
  if (a.n_raw_features != b.n_raw_features || a.n_labels != b.n_labels ||
      a.has_bias != b.has_bias || a.rows_l2_normalized != b.rows_l2_normalized ||
      a.lambda != b.lambda || a.solver != b.solver ||
      a.dataset_fingerprint != b.dataset_fingerprint || a.weights != b.weights)
    return false;
  if (a.stats.size() != b.stats.size()) return false;
  for (size_t i = 0; i < a.stats.size(); ++i) {
    const auto& x = a.stats[i];
    const auto& y = b.stats[i];
    if (x.n_pos != y.n_pos || x.iters != y.iters || x.objective != y.objective ||
        x.nnz != y.nnz || x.converged != y.converged || x.status != y.status ||
        x.diagnostic != y.diagnostic)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("training is bitwise identical across thread counts") {
  std::mt19937 rng(101);
  Dataset data = synthetic_dataset(rng, 80, 16, 10);
  TrainConfig config;
  config.prox.lambda = 0.05;

  TempDir tmp;
  std::string paths[3];
  int thread_counts[3] = {1, 4, 8};
  for (int i = 0; i < 3; ++i) {
    config.threads = thread_counts[i];
    Model model = train_all(data, config);
    paths[i] = tmp.file("model_t" + std::to_string(thread_counts[i]) + ".bin");
    save_model(model, paths[i]);
  }
  std::string reference = read_bytes(paths[0]);
  CHECK(!reference.empty());
  CHECK(read_bytes(paths[1]) == reference);
  CHECK(read_bytes(paths[2]) == reference);
}

TEST_CASE("labels without positives are skipped with zero weights") {
  Dataset data;
  data.n_features = 4;
  data.n_labels = 3;
  for (int i = 0; i < 5; ++i) {
    std::vector<double> row(4, 0.0);
    row[i % 4] = 1.0;
    data.rows.push_back(SparseVector::from_dense(row));
    data.labels.push_back({});
  }
  TrainConfig config;
  Model model = train_all(data, config);
  for (uint32_t l = 0; l < 3; ++l) {
    CHECK(model.weights[l].nnz() == 0);
    CHECK(model.stats[l].status == LabelStatus::kSkippedNoPositives);
  }
}

TEST_CASE("a throwing label is isolated; the rest of the run is intact") {
  std::mt19937 rng(103);
  Dataset data = synthetic_dataset(rng, 60, 12, 8);
  TrainConfig config;
  config.threads = 4;
  auto solve = [&config](uint32_t label, const CsrMatrix& x, std::span<const int8_t> s) {
    if (label == 3) throw NumericalError("synthetic failure for test");
    return solve_prox(x, s, config.prox);
  };
  Model model = train_all_with(data, config, solve);
  CHECK(model.stats[3].status == LabelStatus::kFailed);
  CHECK(model.weights[3].nnz() == 0);
  CHECK(model.stats[3].diagnostic == "synthetic failure for test");
  for (uint32_t l = 0; l < 8; ++l) {
    if (l == 3) continue;
    CHECK(model.stats[l].status == LabelStatus::kTrained);
    CHECK(model.weights[l].nnz() > 0);
  }
}

TEST_CASE("an empty model round-trips") {
  Model m;
  m.n_raw_features = 0;
  m.n_labels = 0;
  m.lambda = 0.5;
  TempDir tmp;
  save_model(m, tmp.file("empty.bin"));
  Model loaded = load_model(tmp.file("empty.bin"));
  CHECK(persisted_equal(m, loaded));
}

TEST_CASE("random models round-trip bitwise") {
  std::mt19937 rng(107);
  TempDir tmp;
  for (int rep = 0; rep < 25; ++rep) {
    Model m = random_model(rng, 1 + rng() % 40, 1 + rng() % 20);
    std::string path = tmp.file("model.bin");
    save_model(m, path);
    Model loaded = load_model(path);
    CHECK(persisted_equal(m, loaded));

    // identical content writes identical bytes
    std::string again = tmp.file("model2.bin");
    save_model(loaded, again);
    CHECK(read_bytes(path) == read_bytes(again));
  }
}

TEST_CASE("load rejects damaged files") {
  std::mt19937 rng(109);
  Model m = random_model(rng, 20, 6);
  TempDir tmp;
  std::string path = tmp.file("model.bin");
  save_model(m, path);
  std::string bytes = read_bytes(path);

  SUBCASE("truncation") {
    std::ofstream out(tmp.file("trunc.bin"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_AS(load_model(tmp.file("trunc.bin")), ModelIoError);
  }
  SUBCASE("flipped payload byte fails the checksum") {
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
    std::ofstream out(tmp.file("corrupt.bin"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_WITH_AS(load_model(tmp.file("corrupt.bin")), doctest::Contains("checksum"),
                         ModelIoError);
  }
  SUBCASE("bad magic") {
    bytes[0] = 'X';
    std::ofstream out(tmp.file("magic.bin"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_WITH_AS(load_model(tmp.file("magic.bin")), doctest::Contains("magic"),
                         ModelIoError);
  }
  SUBCASE("unsupported version") {
    bytes[8] = 99;  // version field follows the 8-byte magic
    std::ofstream out(tmp.file("version.bin"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_WITH_AS(load_model(tmp.file("version.bin")), doctest::Contains("version"),
                         ModelIoError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_model(tmp.file("nope.bin")), ModelIoError); }
}

TEST_CASE("model files store only nonzeros plus bounded overhead") {
  std::mt19937 rng(113);
  Model m = random_model(rng, 200, 40);
  TempDir tmp;
  save_model(m, tmp.file("m.bin"));
  size_t dense_bytes = 200 * 40 * 8;
  size_t actual = read_bytes(tmp.file("m.bin")).size();
  size_t payload = m.total_nnz() * 12;  // u32 delta + f64 value
  CHECK(actual < dense_bytes);
  CHECK(actual >= payload);
}

TEST_CASE("the training log has one row per label with the configured columns") {
  std::mt19937 rng(127);
  Dataset data = synthetic_dataset(rng, 30, 8, 4);
  TrainConfig config;
  Model model = train_all(data, config);
  std::ostringstream log;
  write_train_log(model, log);
  std::istringstream lines(log.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "label_id,n_pos,iters,objective,nnz,seconds");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("cross-validation picks a grid member deterministically") {
  std::mt19937 rng(131);
  Dataset data = synthetic_dataset(rng, 50, 10, 5);
  TrainConfig config;
  config.threads = 2;
  std::vector<double> grid{0.01, 0.1, 10.0};
  double first = cross_validate_lambda(data, config, grid);
  double second = cross_validate_lambda(data, config, grid);
  CHECK(first == second);
  CHECK((first == 0.01 || first == 0.1 || first == 10.0));
}

TEST_CASE("trainer stats match the stored weights") {
  std::mt19937 rng(137);
  Dataset data = synthetic_dataset(rng, 40, 10, 6);
  TrainConfig config;
  Model model = train_all(data, config);
  for (uint32_t l = 0; l < model.n_labels; ++l) {
    CHECK(model.stats[l].nnz == model.weights[l].nnz());
    CHECK(model.weights[l].dim() == model.weight_dim());
  }
  CHECK(model.dataset_fingerprint == dataset_fingerprint(data));
}

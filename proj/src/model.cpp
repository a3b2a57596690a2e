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
#include "proxml/model.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "proxml/errors.hpp"

namespace proxml {

namespace {

constexpr std::array<char, 8> kMagic = {'P', 'R', 'O', 'X', 'M', 'L', 'M', '\n'};
constexpr uint32_t kVersion = 1;

// Table-driven CRC32 (polynomial 0xEDB88320), streamed over the payload.
class Crc32 {
 public:
  Crc32() {
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      table_[i] = c;
    }
  }
  void update(const void* bytes, size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (size_t i = 0; i < n; ++i) crc_ = table_[(crc_ ^ p[i]) & 0xffu] ^ (crc_ >> 8);
  }
  uint32_t value() const { return crc_ ^ 0xffffffffu; }

 private:
  std::array<uint32_t, 256> table_{};
  uint32_t crc_ = 0xffffffffu;
};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void bytes(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    crc_.update(p, n);
  }
  template <typename T>
  void scalar(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
    for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
#endif
    bytes(buf, sizeof(T));
  }
  uint32_t crc() const { return crc_.value(); }

 private:
  std::ostream& out_;
  Crc32 crc_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  void bytes(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) throw ModelIoError("model file truncated");
    crc_.update(p, n);
  }
  template <typename T>
  T scalar() {
    unsigned char buf[sizeof(T)];
    bytes(buf, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
    for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
#endif
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }
  uint32_t crc() const { return crc_.value(); }

 private:
  std::istream& in_;
  Crc32 crc_;
};

nlohmann::json meta_to_json(const Model& m) {
  nlohmann::json meta;
  meta["solver"] = solver_name(m.solver);
  meta["lambda"] = m.lambda;
  meta["n_raw_features"] = m.n_raw_features;
  meta["n_labels"] = m.n_labels;
  meta["has_bias"] = m.has_bias;
  meta["rows_l2_normalized"] = m.rows_l2_normalized;
  meta["dataset_fingerprint"] = m.dataset_fingerprint;
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& st : m.stats) {
    stats.push_back({{"n_pos", st.n_pos},
                     {"iters", st.iters},
                     {"objective", st.objective},
                     {"nnz", st.nnz},
                     {"converged", st.converged},
                     {"status", static_cast<int>(st.status)},
                     {"diagnostic", st.diagnostic}});
  }
  meta["label_stats"] = std::move(stats);
  return meta;
}

void meta_from_json(const nlohmann::json& meta, Model& m) {
  m.stats.clear();
  if (!meta.contains("label_stats")) return;
  for (const auto& item : meta.at("label_stats")) {
    LabelStats st;
    st.n_pos = item.value("n_pos", 0u);
    st.iters = item.value("iters", 0);
    st.objective = item.value("objective", 0.0);
    st.nnz = item.value("nnz", uint64_t{0});
    st.converged = item.value("converged", false);
    st.status = static_cast<LabelStatus>(item.value("status", 0));
    st.diagnostic = item.value("diagnostic", std::string());
    m.stats.push_back(std::move(st));
  }
}

}  // namespace

const char* solver_name(SolverKind kind) {
  return kind == SolverKind::kProx ? "prox" : "ccd";
}

size_t Model::total_nnz() const {
  size_t total = 0;
  for (const auto& w : weights) total += w.nnz();
  return total;
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelIoError("cannot open model file for writing: " + path);

  Writer w(out);
  w.bytes(kMagic.data(), kMagic.size());
  w.scalar<uint32_t>(kVersion);
  uint32_t flags = (model.has_bias ? 1u : 0u) | (model.rows_l2_normalized ? 2u : 0u);
  w.scalar<uint32_t>(flags);
  w.scalar<uint64_t>(model.n_raw_features);
  w.scalar<uint64_t>(model.n_labels);
  w.scalar<double>(model.lambda);
  w.scalar<uint32_t>(static_cast<uint32_t>(model.solver));
  w.scalar<uint64_t>(model.dataset_fingerprint);

  for (const auto& weights : model.weights) {
    w.scalar<uint32_t>(static_cast<uint32_t>(weights.nnz()));
    uint32_t prev = 0;
    bool first = true;
    for (const auto& e : weights.entries()) {
      w.scalar<uint32_t>(first ? e.index : e.index - prev);
      w.scalar<double>(e.value);
      prev = e.index;
      first = false;
    }
  }

  std::string meta = meta_to_json(model).dump();
  w.scalar<uint64_t>(meta.size());
  w.bytes(meta.data(), meta.size());
  w.scalar<uint32_t>(w.crc());
  if (!out) throw ModelIoError("write failure: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelIoError("cannot open model file: " + path);

  Reader r(in);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw ModelIoError("not a model file (bad magic)");
  uint32_t version = r.scalar<uint32_t>();
  if (version != kVersion)
    throw ModelIoError("unsupported model version " + std::to_string(version));

  Model model;
  uint32_t flags = r.scalar<uint32_t>();
  model.has_bias = (flags & 1u) != 0;
  model.rows_l2_normalized = (flags & 2u) != 0;
  model.n_raw_features = static_cast<uint32_t>(r.scalar<uint64_t>());
  model.n_labels = static_cast<uint32_t>(r.scalar<uint64_t>());
  model.lambda = r.scalar<double>();
  model.solver = static_cast<SolverKind>(r.scalar<uint32_t>());
  model.dataset_fingerprint = r.scalar<uint64_t>();

  const uint32_t dim = model.weight_dim();
  model.weights.reserve(model.n_labels);
  for (uint32_t l = 0; l < model.n_labels; ++l) {
    uint32_t nnz = r.scalar<uint32_t>();
    SparseVector weights(dim);
    uint32_t index = 0;
    for (uint32_t k = 0; k < nnz; ++k) {
      uint32_t delta = r.scalar<uint32_t>();
      double value = r.scalar<double>();
      index = k == 0 ? delta : index + delta;
      if (index >= dim) throw ModelIoError("weight index out of range in model file");
      weights.push_back(index, value);
    }
    model.weights.push_back(std::move(weights));
  }

  uint64_t meta_len = r.scalar<uint64_t>();
  std::string meta(meta_len, '\0');
  if (meta_len > 0) r.bytes(meta.data(), meta_len);
  uint32_t expected = r.crc();
  uint32_t stored = r.scalar<uint32_t>();
  // The trailing scalar() fed the checksum itself into the CRC; compare
  // against the value computed before it was consumed.
  if (stored != expected) throw ModelIoError("model checksum mismatch");

  try {
    meta_from_json(nlohmann::json::parse(meta), model);
  } catch (const nlohmann::json::exception& e) {
    throw ModelIoError(std::string("corrupt model metadata: ") + e.what());
  }
  return model;
}

void write_train_log(const Model& model, std::ostream& out) {
  out << "label_id,n_pos,iters,objective,nnz,seconds\n";
  char buf[160];
  for (uint32_t l = 0; l < model.n_labels; ++l) {
    const auto& st = model.stats[l];
    int len = std::snprintf(buf, sizeof(buf), "%u,%u,%d,%.9g,%llu,%.4f\n", l, st.n_pos, st.iters,
                            st.objective, static_cast<unsigned long long>(st.nnz), st.seconds);
    out.write(buf, len);
  }
}

}  // namespace proxml

/* Copyright 2026 The hsrec Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "hsrec/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <limits>
#include <fstream>

#include "json.hpp"

namespace hsrec {

namespace {

constexpr std::array<char, 4> kMagic = {'H', 'S', 'R', 'C'};
constexpr std::uint8_t kFlagClusters = 1;

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw DataError("cannot open '" + path + "' for writing");
  }

  template <typename T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  template <typename T>
  void put_array(const T* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
      out_.write(reinterpret_cast<const char*>(data), std::streamsize(n * sizeof(T)));
    } else {
      for (std::size_t i = 0; i < n; ++i) put(data[i]);
    }
  }

  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), std::streamsize(s.size()));
  }

  void finish(const std::string& path) {
    out_.flush();
    if (!out_) throw DataError("failed writing snapshot '" + path + "'");
  }

  std::ofstream& stream() { return out_; }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw DataError("cannot open snapshot '" + path + "'");
    std::error_code ec;
    remaining_ = std::filesystem::file_size(path, ec);
    if (ec) throw DataError("cannot stat snapshot '" + path + "'");
  }

  void need(std::uint64_t bytes) {
    if (bytes > remaining_) {
      throw DataError("snapshot '" + path_ + "' is truncated");
    }
  }

  void read_bytes(void* dst, std::uint64_t n) {
    need(n);
    in_.read(static_cast<char*>(dst), std::streamsize(n));
    if (!in_) throw DataError("snapshot '" + path_ + "' is truncated");
    remaining_ -= n;
  }

  template <typename T>
  T get() {
    T v;
    read_bytes(&v, sizeof(T));
    return to_little(v);
  }

  template <typename T>
  void get_array(T* data, std::uint64_t n) {
    if (n > 0 && n > remaining_ / sizeof(T)) {
      throw DataError("snapshot '" + path_ + "' is truncated");
    }
    read_bytes(data, n * sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (std::uint64_t i = 0; i < n; ++i) data[i] = to_little(data[i]);
    }
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(n, '\0');
    read_bytes(s.data(), n);
    return s;
  }

  std::uint64_t remaining() const { return remaining_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::uint64_t remaining_ = 0;
};

void write_header(Writer& w, const SnapshotHeader& h) {
  w.stream().write(kMagic.data(), kMagic.size());
  w.put(h.format_version);
  w.put(h.dim);
  w.put(h.item_dim);
  w.put(h.hidden);
  w.put(h.n_text);
  w.put(h.n_items);
  w.put(h.n_item_clusters);
  w.put(h.model_version);
  w.put(h.precision);
  w.put(static_cast<std::uint8_t>(h.mode));
  w.put<std::uint8_t>(h.has_clusters ? kFlagClusters : 0);
}

SnapshotHeader parse_header(Reader& r) {
  std::array<char, 4> magic{};
  if (r.remaining() < magic.size()) {
    throw DataError("'" + r.path() + "' is not an HSRC snapshot (bad magic)");
  }
  r.read_bytes(magic.data(), magic.size());
  if (magic != kMagic) throw DataError("'" + r.path() + "' is not an HSRC snapshot (bad magic)");
  SnapshotHeader h;
  h.format_version = r.get<std::uint32_t>();
  if (h.format_version != kSnapshotVersion) {
    throw DataError("snapshot format version " + std::to_string(h.format_version) +
                    " is not supported (expected " + std::to_string(kSnapshotVersion) + ")");
  }
  h.dim = r.get<std::uint32_t>();
  h.item_dim = r.get<std::uint32_t>();
  h.hidden = r.get<std::uint32_t>();
  h.n_text = r.get<std::uint64_t>();
  h.n_items = r.get<std::uint64_t>();
  h.n_item_clusters = r.get<std::uint64_t>();
  h.model_version = r.get<std::uint64_t>();
  h.precision = r.get<std::uint8_t>();
  if (h.precision != 4 && h.precision != 8) {
    throw DataError("snapshot has unknown precision byte " + std::to_string(h.precision));
  }
  const auto mode = r.get<std::uint8_t>();
  if (mode > 1) throw DataError("snapshot has unknown softmax mode " + std::to_string(mode));
  h.mode = static_cast<SoftmaxMode>(mode);
  h.has_clusters = (r.get<std::uint8_t>() & kFlagClusters) != 0;
  if (h.n_text + h.n_items > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("snapshot token space exceeds 32-bit ordinals");
  }
  return h;
}

template <typename Derived>
void put_matrix(Writer& w, const Eigen::PlainObjectBase<Derived>& m) {
  w.put_array(m.data(), std::size_t(m.size()));
}

template <typename Derived>
void get_matrix(Reader& r, Eigen::PlainObjectBase<Derived>& m, Eigen::Index rows,
                Eigen::Index cols) {
  if (rows > 0 && cols > 0 &&
      std::uint64_t(rows) * std::uint64_t(cols) >
          r.remaining() / sizeof(typename Derived::Scalar)) {
    throw DataError("snapshot '" + r.path() + "' is truncated");
  }
  m.resize(rows, cols);
  r.get_array(m.data(), std::uint64_t(m.size()));
}

}  // namespace

template <typename Scalar>
void save_snapshot(const Snapshot<Scalar>& snap, const std::string& path) {
  const Model<Scalar>& m = snap.model;
  SnapshotHeader h;
  h.dim = static_cast<std::uint32_t>(m.dim());
  h.item_dim = static_cast<std::uint32_t>(m.item_dim());
  h.hidden = static_cast<std::uint32_t>(m.encoder.hidden());
  h.n_text = m.space.n_text();
  h.n_items = m.space.n_items();
  h.n_item_clusters = m.clusters ? m.clusters->n_item_clusters() : 0;
  h.model_version = m.version;
  h.precision = sizeof(Scalar);
  h.mode = m.mode;
  h.has_clusters = m.clusters.has_value();

  Writer w(path);
  write_header(w, h);
  put_matrix(w, m.text);
  put_matrix(w, m.item_raw);
  put_matrix(w, m.head.weight);
  put_matrix(w, m.head.bias);
  put_matrix(w, m.centroids);
  if (m.clusters) {
    const auto& a = m.clusters->assignment();
    w.put_array(a.data(), a.size());
  }
  put_matrix(w, m.encoder.w1);
  put_matrix(w, m.encoder.b1);
  put_matrix(w, m.encoder.w2);
  put_matrix(w, m.encoder.b2);
  w.put<std::uint64_t>(snap.vocab_words.size());
  for (const auto& s : snap.vocab_words) w.put_string(s);
  w.put<std::uint64_t>(snap.price_edges.size());
  w.put_array(snap.price_edges.data(), snap.price_edges.size());
  w.put<std::uint64_t>(snap.item_keys.size());
  for (const auto& s : snap.item_keys) w.put_string(s);
  w.finish(path);
}

template <typename Scalar>
Snapshot<Scalar> load_snapshot(const std::string& path) {
  Reader r(path);
  const SnapshotHeader h = parse_header(r);
  if (h.precision != sizeof(Scalar)) {
    throw DataError("snapshot precision is f" + std::to_string(8 * h.precision) +
                    ", expected f" + std::to_string(8 * sizeof(Scalar)));
  }
  const auto d = Eigen::Index(h.dim), k = Eigen::Index(h.item_dim),
             hid = Eigen::Index(h.hidden);
  Snapshot<Scalar> snap;
  Model<Scalar>& m = snap.model;
  m.space = TokenSpace(std::uint32_t(h.n_text), std::uint32_t(h.n_items));
  m.mode = h.mode;
  m.version = h.model_version;
  get_matrix(r, m.text, Eigen::Index(h.n_text), d);
  get_matrix(r, m.item_raw, Eigen::Index(h.n_items), k);
  get_matrix(r, m.head.weight, d, k);
  get_matrix(r, m.head.bias, d, 1);
  get_matrix(r, m.centroids, Eigen::Index(h.n_item_clusters), d);
  if (h.has_clusters) {
    const std::uint64_t n = h.n_text + h.n_items;
    if (n > r.remaining() / sizeof(std::uint32_t)) {
      throw DataError("snapshot '" + path + "' is truncated");
    }
    std::vector<std::uint32_t> assignment(n);
    r.get_array(assignment.data(), n);
    m.clusters = ClusterMap::from_assignment(m.space, std::move(assignment));
    if (m.clusters->n_item_clusters() != h.n_item_clusters) {
      throw DataError("snapshot cluster assignment disagrees with its header");
    }
  } else if (h.mode == SoftmaxMode::kTwoLevel) {
    throw DataError("two-level snapshot without a cluster assignment");
  }
  get_matrix(r, m.encoder.w1, hid, d);
  get_matrix(r, m.encoder.b1, hid, 1);
  get_matrix(r, m.encoder.w2, d, hid);
  get_matrix(r, m.encoder.b2, d, 1);

  const auto read_strings = [&](std::vector<std::string>& out) {
    const auto n = r.get<std::uint64_t>();
    if (n > r.remaining() / sizeof(std::uint32_t)) {
      throw DataError("snapshot '" + path + "' is truncated");
    }
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(r.get_string());
  };
  read_strings(snap.vocab_words);
  const auto n_edges = r.get<std::uint64_t>();
  if (n_edges > r.remaining() / sizeof(double)) {
    throw DataError("snapshot '" + path + "' is truncated");
  }
  snap.price_edges.resize(n_edges);
  r.get_array(snap.price_edges.data(), n_edges);
  read_strings(snap.item_keys);
  if (r.remaining() != 0) throw DataError("snapshot '" + path + "' has trailing bytes");
  return snap;
}

SnapshotHeader read_snapshot_header(const std::string& path) {
  Reader r(path);
  return parse_header(r);
}

StorageReport storage_report(const SnapshotHeader& h) {
  StorageReport s;
  s.text_parameters = h.n_text * h.dim;
  s.item_parameters = h.n_items * h.item_dim;
  s.head_parameters = std::uint64_t(h.dim) * h.item_dim + h.dim;
  s.centroid_parameters = h.n_item_clusters * h.dim;
  s.encoder_parameters = 2 * std::uint64_t(h.hidden) * h.dim + h.hidden + h.dim;
  s.total_parameters = s.text_parameters + s.item_parameters + s.head_parameters +
                       s.centroid_parameters + s.encoder_parameters;
  s.payload_bytes = s.total_parameters * h.precision +
                    (h.has_clusters ? (h.n_text + h.n_items) * sizeof(std::uint32_t) : 0);
  return s;
}

std::string StorageReport::to_json() const {
  nlohmann::ordered_json j;
  j["text_parameters"] = text_parameters;
  j["item_parameters"] = item_parameters;
  j["head_parameters"] = head_parameters;
  j["centroid_parameters"] = centroid_parameters;
  j["encoder_parameters"] = encoder_parameters;
  j["total_parameters"] = total_parameters;
  j["payload_bytes"] = payload_bytes;
  return j.dump(2);
}

template void save_snapshot<float>(const Snapshot<float>&, const std::string&);
template void save_snapshot<double>(const Snapshot<double>&, const std::string&);
template Snapshot<float> load_snapshot<float>(const std::string&);
template Snapshot<double> load_snapshot<double>(const std::string&);

}  // namespace hsrec

//
// Copyright 2026 The feedbias Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "feedbias/embedder.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "feedbias/text.h"
#include "json.hpp"

namespace feedbias {
namespace {

static_assert(sizeof(float) == 4);

uint32_t ToLittle(uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

void AppendFloats(std::string& out, const double* values, size_t count) {
  for (size_t i = 0; i < count; ++i) {
    const uint32_t bits = ToLittle(std::bit_cast<uint32_t>(static_cast<float>(values[i])));
    char raw[4];
    std::memcpy(raw, &bits, 4);
    out.append(raw, 4);
  }
}

void ReadFloats(const char* data, size_t count, double* out) {
  for (size_t i = 0; i < count; ++i) {
    uint32_t bits;
    std::memcpy(&bits, data + 4 * i, 4);
    out[i] = static_cast<double>(std::bit_cast<float>(ToLittle(bits)));
  }
}

// Rounds every component to float32 so that the cache round-trip is exact.
void QuantizeToFloat(VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = static_cast<double>(static_cast<float>(v[i]));
}

// Unit vector w with float32(w) == s and s / |s| == w, so that storing w as
// float32 and renormalizing on load reproduces w bit for bit.
VectorXd CanonicalUnit(const VectorXd& v) {
  VectorXd stored = v / v.norm();
  QuantizeToFloat(stored);
  for (int round = 0; round < 8; ++round) {
    VectorXd unit = stored / stored.norm();
    VectorXd requantized = unit;
    QuantizeToFloat(requantized);
    if (requantized == stored) return unit;
    stored = std::move(requantized);
  }
  return stored / stored.norm();
}

}  // namespace

void EmbeddingVector::Validate() const {
  Require(values.size() > 0, "embedding has zero dimensions");
  Require(values.allFinite(), "embedding has non-finite values");
  if (normalized) {
    Require(std::abs(values.norm() - 1.0) < 1e-9, "normalized embedding is off the unit sphere");
  }
}

MockEmbedder::MockEmbedder(size_t dim, uint64_t hash_seed) : dim_(dim), hash_seed_(hash_seed) {
  Require(dim_ > 0, "mock embedding dim must be positive");
}

std::string MockEmbedder::ModelId() const {
  return "mock-hash-" + std::to_string(dim_) + "-" + std::to_string(hash_seed_);
}

EmbeddingVector MockEmbedder::Embed(std::string_view text) {
  ++calls_;
  Require(!text.empty(), "cannot embed empty text");
  std::vector<std::string> tokens;
  for (const WordSpan& span : WordSpans(text)) tokens.push_back(AsciiLower(span.View(text)));
  Require(!tokens.empty(), "text has no word tokens to embed");

  VectorXd v = VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  const auto add = [&](const std::string& feature) {
    const uint64_t h = Fnv1a64(feature, hash_seed_);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[static_cast<Eigen::Index>((h & 0x7fffffffffffffffULL) % dim_)] += sign;
  };
  for (size_t i = 0; i < tokens.size(); ++i) {
    add("u:" + tokens[i]);
    if (i + 1 < tokens.size()) add("b:" + tokens[i] + ' ' + tokens[i + 1]);
  }
  if (v.norm() == 0.0) {
    // Every feature cancelled; fall back to the first unigram's bucket.
    add("u:" + tokens[0]);
  }
  EmbeddingVector out{CanonicalUnit(v), true};
  out.Validate();
  return out;
}

HttpEmbedder::HttpEmbedder(EmbeddingEndpointConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  Require(!config_.base_url.empty(), "embedding base_url is empty");
  Require(!config_.model.empty(), "embedding model is empty");
}

EmbeddingVector HttpEmbedder::Embed(std::string_view text) {
  Require(!text.empty(), "cannot embed empty text");
  std::string bearer;
  if (!config_.api_key_env.empty()) {
    if (const char* value = std::getenv(config_.api_key_env.c_str())) bearer = value;
  }
  nlohmann::ordered_json body;
  body["model"] = config_.model;
  body["input"] = std::string(text);
  const std::string payload = body.dump();
  VectorXd values;
  const auto attempt = [&]() -> AttemptOutcome {
    const HttpResponse response =
        PostJson(config_.base_url, "/embeddings", payload, bearer, config_.timeout);
    AttemptOutcome outcome = ClassifyHttp(response);
    if (!outcome.ok) return outcome;
    try {
      const auto j = nlohmann::json::parse(response.body);
      const auto& data = j.at("data").at(0).at("embedding");
      values.resize(static_cast<Eigen::Index>(data.size()));
      for (size_t i = 0; i < data.size(); ++i) values[static_cast<Eigen::Index>(i)] = data[i].get<double>();
    } catch (const nlohmann::json::exception& e) {
      return {false, true, std::nullopt, std::string("unparseable embedding: ") + e.what()};
    }
    return outcome;
  };
  const RetryReport report = CallWithRetries(attempt, config_.retry, sleeper_, Fnv1a64(text));
  if (!report.ok) {
    Fail(ErrorKind::kTransport, "embedding failed after " + std::to_string(report.attempts) +
                                    " attempts: " + report.last_error);
  }
  Require(config_.expected_dim == 0 || static_cast<size_t>(values.size()) == config_.expected_dim,
          "embedding endpoint returned dim " + std::to_string(values.size()) + ", expected " +
              std::to_string(config_.expected_dim));
  QuantizeToFloat(values);
  EmbeddingVector out{std::move(values), false};
  out.Validate();
  return out;
}

EmbeddingCache::EmbeddingCache(std::string directory) : directory_(std::move(directory)) {}

std::string EmbeddingCache::Key(std::string_view model_id, std::string_view text) {
  std::string material(model_id);
  material.push_back('\x1f');
  material.append(text);
  return Sha256Hex(material);
}

void EmbeddingCache::Load() {
  if (loaded_) return;
  loaded_ = true;
  const std::filesystem::path dir(directory_);
  std::ifstream index(dir / "vectors.jsonl");
  const uint64_t payload_size = std::filesystem::exists(dir / "vectors.f32")
                                    ? std::filesystem::file_size(dir / "vectors.f32")
                                    : 0;
  std::string line;
  while (std::getline(index, line)) {
    try {
      const auto j = nlohmann::json::parse(line);
      const Entry entry{j.at("offset").get<uint64_t>(), j.at("dim").get<uint64_t>(),
                        j.at("normalized").get<bool>()};
      if (entry.offset + entry.dim * 4 > payload_size) continue;  // torn write
      index_[j.at("key").get<std::string>()] = entry;
    } catch (const nlohmann::json::exception&) {
      continue;
    }
  }
}

bool EmbeddingCache::Lookup(const std::string& key, EmbeddingVector* out) {
  std::lock_guard lock(mutex_);
  Load();
  const auto it = index_.find(key);
  if (it == index_.end()) return false;
  std::ifstream payload(std::filesystem::path(directory_) / "vectors.f32", std::ios::binary);
  payload.seekg(static_cast<std::streamoff>(it->second.offset));
  std::string raw(it->second.dim * 4, '\0');
  payload.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!payload) return false;
  out->values.resize(static_cast<Eigen::Index>(it->second.dim));
  ReadFloats(raw.data(), it->second.dim, out->values.data());
  out->normalized = it->second.normalized;
  if (out->normalized) out->values /= out->values.norm();
  return true;
}

void EmbeddingCache::Store(const std::string& key, const EmbeddingVector& vector) {
  std::lock_guard lock(mutex_);
  Load();
  if (index_.contains(key)) return;
  const std::filesystem::path dir(directory_);
  std::filesystem::create_directories(dir);
  const uint64_t offset = std::filesystem::exists(dir / "vectors.f32")
                              ? std::filesystem::file_size(dir / "vectors.f32")
                              : 0;
  std::string raw;
  AppendFloats(raw, vector.values.data(), static_cast<size_t>(vector.values.size()));
  {
    std::ofstream payload(dir / "vectors.f32", std::ios::binary | std::ios::app);
    payload.write(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!payload) Fail(ErrorKind::kIo, "cannot append to embedding cache");
  }
  nlohmann::ordered_json entry;
  entry["key"] = key;
  entry["offset"] = offset;
  entry["dim"] = vector.values.size();
  entry["normalized"] = vector.normalized;
  std::ofstream index(dir / "vectors.jsonl", std::ios::app);
  index << entry.dump() << '\n';
  index_[key] = {offset, static_cast<uint64_t>(vector.values.size()), vector.normalized};
}

GroupEmbeddings EmbedGroup(const std::vector<FeedbackRecord>& records, Embedder& embedder,
                           EmbeddingCache& cache, EmbedStats* stats) {
  Require(!records.empty(), "cannot embed an empty group");
  const std::string label(GroupLabel(records.front().condition));
  for (const auto& record : records) {
    Require(GroupLabel(record.condition) == label && record.condition == records.front().condition,
            "records in one group must share a condition");
    Require(record.model_id == records.front().model_id, "records in one group must share a model");
  }
  std::vector<size_t> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return records[a].essay_id < records[b].essay_id;
  });
  for (size_t k = 1; k < order.size(); ++k) {
    Require(records[order[k]].essay_id != records[order[k - 1]].essay_id,
            "duplicate essay id '" + records[order[k]].essay_id + "' in group " + label);
  }

  GroupEmbeddings group;
  group.group_label = label;
  std::vector<std::string> failures;
  std::vector<VectorXd> rows;
  rows.reserve(records.size());
  const std::string model_id = embedder.ModelId();
  for (const size_t i : order) {
    const FeedbackRecord& record = records[i];
    group.essay_ids.push_back(record.essay_id);
    const std::string key = EmbeddingCache::Key(model_id, record.response_text);
    EmbeddingVector vector;
    try {
      if (cache.Lookup(key, &vector)) {
        if (stats) ++stats->cache_hits;
      } else {
        vector = embedder.Embed(record.response_text);
        if (stats) ++stats->embed_calls;
        cache.Store(key, vector);
      }
    } catch (const std::exception& e) {
      failures.push_back(record.job_id + ": " + e.what());
      rows.emplace_back();
      continue;
    }
    rows.push_back(std::move(vector.values));
  }
  if (!failures.empty()) {
    std::string message = std::to_string(failures.size()) + " embedding(s) failed:";
    for (const auto& f : failures) message += "\n  " + f;
    Fail(ErrorKind::kTransport, message);
  }
  const Eigen::Index dim = rows.front().size();
  group.vectors.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (size_t r = 0; r < rows.size(); ++r) {
    Require(rows[r].size() == dim, "embedding dims differ within group " + label);
    group.vectors.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  }
  return group;
}

void RequireAligned(const GroupEmbeddings& x, const GroupEmbeddings& y) {
  Require(x.size() == y.size(), "groups differ in size: " + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()));
  Require(x.dim() == y.dim(), "groups differ in embedding dim");
  Require(x.essay_ids == y.essay_ids, "groups are not aligned by essay_id");
}

void SaveGroup(const GroupEmbeddings& group, const std::string& path_stem) {
  std::string raw;
  raw.reserve(static_cast<size_t>(group.vectors.size()) * 4);
  AppendFloats(raw, group.vectors.data(), static_cast<size_t>(group.vectors.size()));
  WriteFile(path_stem + ".f32", raw);
  nlohmann::ordered_json sidecar;
  sidecar["schema"] = "feedbias.group_embeddings/v1";
  sidecar["group_label"] = group.group_label;
  sidecar["n"] = group.size();
  sidecar["dim"] = group.dim();
  sidecar["dtype"] = "float32-le";
  sidecar["essay_ids"] = group.essay_ids;
  WriteFile(path_stem + ".json", sidecar.dump(2) + "\n");
}

GroupEmbeddings LoadGroup(const std::string& path_stem) {
  const auto sidecar = nlohmann::json::parse(ReadFile(path_stem + ".json"));
  GroupEmbeddings group;
  group.group_label = sidecar.at("group_label").get<std::string>();
  group.essay_ids = sidecar.at("essay_ids").get<std::vector<std::string>>();
  const auto n = sidecar.at("n").get<Eigen::Index>();
  const auto dim = sidecar.at("dim").get<Eigen::Index>();
  const std::string raw = ReadFile(path_stem + ".f32");
  Require(static_cast<Eigen::Index>(raw.size()) == n * dim * 4,
          "embedding payload size mismatch for " + path_stem);
  Require(static_cast<Eigen::Index>(group.essay_ids.size()) == n, "essay_ids count mismatch");
  group.vectors.resize(n, dim);
  ReadFloats(raw.data(), static_cast<size_t>(n * dim), group.vectors.data());
  return group;
}

}  // namespace feedbias

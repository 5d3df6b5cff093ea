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

#ifndef FEEDBIAS_EMBEDDER_H_
#define FEEDBIAS_EMBEDDER_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "feedbias/http.h"
#include "feedbias/llmclient.h"
#include "feedbias/types.h"

namespace feedbias {

struct EmbeddingVector {
  VectorXd values;
  bool normalized = false;

  Eigen::Index dim() const { return values.size(); }
  // Throws when values are non-finite or a normalized vector is off the sphere.
  void Validate() const;
};

// An ordered, index-paired collection: row i belongs to essay_ids[i], and rows
// are sorted by essay_id so two groups built from the same essays line up.
struct GroupEmbeddings {
  std::string group_label;
  std::vector<std::string> essay_ids;
  RowMatrixXd vectors;  // n x dim

  Eigen::Index size() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector Embed(std::string_view text) = 0;
  // Identifies the embedding model in cache keys.
  virtual std::string ModelId() const = 0;
};

// L2-normalized signed feature hash of lowercased word unigrams and bigrams.
class MockEmbedder : public Embedder {
 public:
  static constexpr uint64_t kDefaultHashSeed = 0x5eed5eedULL;

  explicit MockEmbedder(size_t dim = 256, uint64_t hash_seed = kDefaultHashSeed);
  EmbeddingVector Embed(std::string_view text) override;
  std::string ModelId() const override;
  size_t calls() const { return calls_.load(); }

 private:
  size_t dim_;
  uint64_t hash_seed_;
  std::atomic<size_t> calls_{0};
};

struct EmbeddingEndpointConfig {
  std::string base_url;
  std::string model = "text-embedding-3-large";
  size_t expected_dim = 3072;
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
  std::string api_key_env;
};

// POST {base_url}/embeddings with {model, input}; reads data[0].embedding.
// Vectors are used as returned (not re-normalized).
class HttpEmbedder : public Embedder {
 public:
  explicit HttpEmbedder(EmbeddingEndpointConfig config, Sleeper sleeper = RealSleeper());
  EmbeddingVector Embed(std::string_view text) override;
  std::string ModelId() const override { return config_.model; }

 private:
  EmbeddingEndpointConfig config_;
  Sleeper sleeper_;
};

// Content-addressed vector store: little-endian float32 payloads in
// vectors.f32 plus a JSON-lines index (key, offset, dim, normalized).
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::string directory);

  static std::string Key(std::string_view model_id, std::string_view text);
  bool Lookup(const std::string& key, EmbeddingVector* out);
  void Store(const std::string& key, const EmbeddingVector& vector);

 private:
  void Load();

  struct Entry {
    uint64_t offset;
    uint64_t dim;
    bool normalized;
  };
  std::string directory_;
  std::mutex mutex_;
  bool loaded_ = false;
  std::unordered_map<std::string, Entry> index_;
};

struct EmbedStats {
  size_t embed_calls = 0;
  size_t cache_hits = 0;
};

// One vector per record. All records must share model and group label.
// Per-text failures are collected and reported together.
GroupEmbeddings EmbedGroup(const std::vector<FeedbackRecord>& records, Embedder& embedder,
                           EmbeddingCache& cache, EmbedStats* stats = nullptr);

// Rejects differing dims or essay_id order between the two groups.
void RequireAligned(const GroupEmbeddings& x, const GroupEmbeddings& y);

// Binary payload (little-endian float32, row-major) + JSON sidecar.
void SaveGroup(const GroupEmbeddings& group, const std::string& path_stem);
GroupEmbeddings LoadGroup(const std::string& path_stem);

}  // namespace feedbias

#endif  // FEEDBIAS_EMBEDDER_H_

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

#include "support.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <cctype>
#include <unistd.h>

#include "feedbias/rng.h"

#ifndef FEEDBIAS_SOURCE_DIR
#error "FEEDBIAS_SOURCE_DIR must be defined"
#endif

namespace feedbias::testing {
namespace fs = std::filesystem;

std::string SourcePath(const std::string& relative) {
  return (fs::path(FEEDBIAS_SOURCE_DIR) / relative).string();
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  const fs::path base = fs::temp_directory_path();
  for (int attempt = 0;; ++attempt) {
    const fs::path candidate =
        base / ("feedbias-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    if (fs::create_directory(candidate)) {
      path_ = candidate.string();
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::File(const std::string& name) const { return (fs::path(path_) / name).string(); }

GroupEmbeddings GaussianGroup(const std::string& label, size_t n, size_t dim, uint64_t seed,
                              uint64_t stream) {
  SeededRng rng(seed, stream);
  GroupEmbeddings g;
  g.group_label = label;
  g.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "e%05zu", i);
    g.essay_ids.push_back(id);
    for (size_t c = 0; c < dim; ++c) {
      g.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rng.Normal();
    }
  }
  return g;
}

ClusterFixture ThreeClusters(size_t n, size_t dim, uint64_t seed) {
  SeededRng rng(seed);
  ClusterFixture f;
  f.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 3);
    f.cluster.push_back(c);
    for (size_t d = 0; d < dim; ++d) {
      const double centre = (static_cast<int>(d) % 3 == c) ? 10.0 : 0.0;
      f.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = centre + rng.Normal();
    }
  }
  return f;
}

double ExhaustivePValue(const MatrixXd& distances) {
  const size_t m = static_cast<size_t>(distances.rows());
  const size_t n = m / 2;
  std::vector<size_t> perm(m);
  std::iota(perm.begin(), perm.end(), size_t{0});
  const auto statistic = [&](const std::vector<size_t>& p) {
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      sum += distances(static_cast<Eigen::Index>(p[i]), static_cast<Eigen::Index>(p[n + i]));
    }
    return sum / static_cast<double>(n);
  };
  const double t_obs = statistic(perm);
  std::vector<double> all;
  do {
    all.push_back(statistic(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double mean = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  const double observed = std::abs(t_obs - mean);
  const auto extreme = std::count_if(all.begin(), all.end(), [&](double t) {
    return std::abs(t - mean) >= observed - 1e-12;
  });
  return static_cast<double>(extreme) / static_cast<double>(all.size());
}

namespace {

const std::vector<std::string> kSentences = {
    "{P} thinks the school day should start later because students are tired in the morning.",
    "When {P} visited the museum, {D} teacher asked {O} to write about the paintings.",
    "The {N} in the story wants to travel across the ocean on a cattle boat.",
    "{P} argues that driverless cars could make the roads safer for everyone.",
    "Scientists told {O} that Venus is a dangerous planet with thick clouds.",
    "{D} main point is that students should be allowed to choose their own projects.",
    "Every summer {P} helps {D} family on the farm and learns about animals.",
    "The {N} believes that online classes can help students who live far away.",
    "{P} explains that the face on Mars is only a natural landform.",
    "In {D} opinion, community service should be optional and not required.",
    "{P} gives three reasons and supports each one with an example from the article.",
    "The author says that {P} changed {D} mind after reading about the program.",
};

std::string Fill(std::string s, bool male, bool sentence_start) {
  const auto replace = [&](const std::string& key, std::string value) {
    for (size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos)) {
      if (pos == 0 && sentence_start) value[0] = static_cast<char>(std::toupper(value[0]));
      s.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  replace("{P}", male ? "he" : "she");
  replace("{O}", male ? "him" : "her");
  replace("{D}", male ? "his" : "her");
  replace("{N}", male ? "boy" : "girl");
  return s;
}

}  // namespace

std::string SyntheticCorpusCsv(size_t m_count, size_t f_count, uint64_t seed) {
  std::string csv = "essay_id,full_text\n";
  SeededRng rng(seed, /*stream=*/0xc0);
  const auto essay = [&](bool male) {
    std::vector<size_t> order(kSentences.size());
    std::iota(order.begin(), order.end(), size_t{0});
    rng.Shuffle(std::span<size_t>(order));
    const size_t count = 3 + static_cast<size_t>(rng.Below(3));
    std::string text;
    for (size_t k = 0; k < count; ++k) {
      if (!text.empty()) text += ' ';
      text += Fill(kSentences[order[k]], male, true);
    }
    return text;
  };
  for (size_t i = 0; i < m_count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "m%04zu", i);
    csv += std::string(id) + ",\"" + essay(true) + "\"\n";
  }
  for (size_t i = 0; i < f_count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "f%04zu", i);
    csv += std::string(id) + ",\"" + essay(false) + "\"\n";
  }
  return csv;
}

ExperimentConfig MockConfig(const std::string& corpus_path, const std::string& run_root,
                            uint64_t seed, MockMode mode) {
  ExperimentConfig c;
  c.run_root = run_root;
  c.seed = seed;
  c.corpus.path = corpus_path;
  c.corpus.screening.seed = seed;
  c.lexicon_path = SourcePath("resources/gender_pairs.tsv");
  ModelSettings model;
  model.id = "mock-llm";
  model.endpoint.model = "mock-llm";
  c.models.push_back(model);
  c.mock.enabled = true;
  c.mock.mode = mode;
  c.stats.metrics = {MetricKind::kCosine};
  c.tsne.seed = seed;
  c.textstats.academic_words = SourcePath("resources/fixtures/academic_words.txt");
  c.textstats.concreteness_norms = SourcePath("resources/fixtures/concreteness.csv");
  c.textstats.patterns = SourcePath("resources/markers.json");
  return c;
}

}  // namespace feedbias::testing

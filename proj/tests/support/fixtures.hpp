#pragma once

// Synthetic corpora and scratch directories shared by the test binaries.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ada/alignment.hpp"
#include "ada/features.hpp"
#include "ada/rng.hpp"

namespace ada::test {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("ada_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline FeatureMatrix random_matrix(std::size_t frames, std::size_t dims, Rng& rng) {
  FeatureMatrix m(frames, dims);
  for (float& v : m.data()) v = static_cast<float>(rng.uniform01() * 20.0 - 10.0);
  return m;
}

struct SyntheticCorpus {
  std::vector<Utterance> utterances;
  std::vector<AlignedUtterance> alignments;

  /// CTM lines at 100 fps, 4 decimals.
  std::string ctm() const {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    for (const auto& a : alignments) {
      for (const auto& s : a.spans) {
        out << a.utt_id << " 1 " << static_cast<double>(s.start_frame) / 100.0 << ' '
            << static_cast<double>(s.width()) / 100.0 << ' ' << s.token << '\n';
      }
    }
    return out.str();
  }
};

struct CorpusShape {
  std::size_t n_utterances = 100;
  std::size_t min_tokens = 5;
  std::size_t max_tokens = 30;
  std::size_t min_width = 3;
  std::size_t max_width = 12;
  std::size_t max_gap = 3;
  std::size_t vocab = 50;
  std::size_t dims = 80;
};

/// Random utterances whose spans tile the features with short silent gaps.
inline SyntheticCorpus make_corpus(const CorpusShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticCorpus c;
  for (std::size_t u = 0; u < shape.n_utterances; ++u) {
    const std::string id = "utt" + std::to_string(u);
    const std::size_t n_tok = shape.min_tokens + rng.index(shape.max_tokens - shape.min_tokens + 1);
    AlignedUtterance a{id, {}};
    std::vector<std::string> transcript;
    std::size_t frame = rng.index(shape.max_gap + 1);
    for (std::size_t t = 0; t < n_tok; ++t) {
      const std::string word = "w" + std::to_string(rng.index(shape.vocab));
      const std::size_t width = shape.min_width + rng.index(shape.max_width - shape.min_width + 1);
      a.spans.push_back({word, frame, frame + width});
      transcript.push_back(word);
      frame += width + rng.index(shape.max_gap + 1);
    }
    c.utterances.push_back({id, random_matrix(frame, shape.dims, rng), transcript});
    c.alignments.push_back(std::move(a));
  }
  return c;
}

/// Writes ADAF files, manifest.tsv and alignments.ctm into `dir`.
inline void write_corpus(const SyntheticCorpus& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "feats");
  CorpusManifest manifest;
  for (const auto& u : c.utterances) {
    const auto rel = std::filesystem::path("feats") / (u.utt_id + ".adaf");
    write_features(u.features, dir / rel);
    manifest.entries.push_back({u.utt_id, rel, u.transcript});
  }
  write_manifest(manifest, dir / "manifest.tsv");
  write_file(dir / "alignments.ctm", c.ctm());
}

/// Two utterances "the cat" and "the dog", 4 dims, distinct cell values.
inline SyntheticCorpus the_cat_the_dog() {
  SyntheticCorpus c;
  auto make = [](std::size_t frames, float base) {
    FeatureMatrix m(frames, 4);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t d = 0; d < 4; ++d) m.at(t, d) = base + static_cast<float>(t) + 0.25f * static_cast<float>(d);
    }
    return m;
  };
  c.utterances.push_back({"u1", make(72, 0.0f), {"the", "cat"}});
  c.utterances.push_back({"u2", make(60, 1000.0f), {"the", "dog"}});
  c.alignments.push_back({"u1", {{"the", 0, 30}, {"cat", 30, 72}}});
  c.alignments.push_back({"u2", {{"the", 5, 25}, {"dog", 28, 60}}});
  return c;
}

}  // namespace ada::test

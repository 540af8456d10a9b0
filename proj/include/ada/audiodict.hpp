#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ada/alignment.hpp"
#include "ada/features.hpp"
#include "ada/rng.hpp"

namespace ada {

/// One aligned feature segment, owned by the dictionary.
struct SegmentEntry {
  std::uint64_t segment_id = 0;
  std::string source_utt_id;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  FeatureMatrix data;

  std::size_t n_frames() const noexcept { return end_frame - start_frame; }
  friend bool operator==(const SegmentEntry&, const SegmentEntry&) = default;
};

/// Identifies the segment cut from a given position of a given utterance.
struct SegmentOrigin {
  std::string source_utt_id;
  std::size_t start_frame;
};

struct DictStats {
  std::size_t n_keys = 0;
  std::size_t n_segments = 0;
  std::size_t total_frames = 0;
  std::map<std::size_t, std::size_t> pool_size_histogram;  // pool size -> key count

  friend bool operator==(const DictStats&, const DictStats&) = default;
};

/// Token-keyed pools of aligned feature segments. Immutable once built or
/// loaded; concurrent readers need no synchronization.
class AudioDictionary {
 public:
  explicit AudioDictionary(std::size_t n_dims = FeatureMatrix::kDefaultDims) : n_dims_(n_dims) {}

  std::size_t n_dims() const noexcept { return n_dims_; }
  std::size_t n_keys() const noexcept { return pools_.size(); }
  bool contains(std::string_view token) const;

  /// Sorted key list.
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  /// Empty span when the token is absent.
  std::span<const SegmentEntry> pool(std::string_view token) const;
  const std::map<std::string, std::vector<SegmentEntry>, std::less<>>& pools() const noexcept {
    return pools_;
  }

  /// Appends to the token's pool. Throws DimensionMismatch.
  void insert(const std::string& token, SegmentEntry entry);
  /// Overwrites slot `index` of an existing pool (reservoir replacement).
  void replace(const std::string& token, std::size_t index, SegmentEntry entry);

  friend bool operator==(const AudioDictionary&, const AudioDictionary&) = default;

 private:
  std::size_t n_dims_;
  std::map<std::string, std::vector<SegmentEntry>, std::less<>> pools_;
  std::vector<std::string> keys_;
};

struct BuildOptions {
  std::size_t max_pool = 0;    // 0 means unlimited
  std::size_t min_frames = 1;  // segments shorter than this are skipped
  std::uint64_t seed = 0;      // reservoir sampling when max_pool is set
};

/// Incremental builder; feed one utterance at a time so corpora never need
/// to be fully resident.
class DictionaryBuilder {
 public:
  explicit DictionaryBuilder(BuildOptions opts = {});

  /// Validates `a` against `u` and adds one segment per span.
  /// Throws DimensionMismatch and the validate() errors.
  void add(const Utterance& u, const AlignedUtterance& a);

  std::size_t spans_seen() const noexcept { return next_id_; }
  AudioDictionary finish() &&;

 private:
  BuildOptions opts_;
  Rng rng_;
  std::optional<AudioDictionary> dict_;
  std::map<std::string, std::size_t, std::less<>> seen_per_token_;
  std::uint64_t next_id_ = 0;
};

/// Builds from a manifest, loading features per entry. Every aligned
/// utterance must be present in the corpus (UnknownUtterance otherwise);
/// corpus entries without an alignment contribute nothing.
AudioDictionary build_dictionary(const CorpusManifest& corpus,
                                 const std::vector<AlignedUtterance>& alignments,
                                 const BuildOptions& opts = {});

/// In-memory variant of build_dictionary.
AudioDictionary build_dictionary(const std::vector<Utterance>& corpus,
                                 const std::vector<AlignedUtterance>& alignments,
                                 const BuildOptions& opts = {});

/// Uniform draw from the token's pool, skipping the segment that matches
/// `exclude` unless it is the only one. nullptr iff the token is absent.
const SegmentEntry* sample(const AudioDictionary& d, std::string_view token, Rng& rng,
                           const std::optional<SegmentOrigin>& exclude = std::nullopt);

DictStats stats(const AudioDictionary& d);

inline constexpr std::uint16_t kAdadVersion = 1;

void save(const AudioDictionary& d, const std::filesystem::path& path);
AudioDictionary load(const std::filesystem::path& path);

}  // namespace ada

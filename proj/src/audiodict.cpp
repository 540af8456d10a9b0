#include "ada/audiodict.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "ada/error.hpp"
#include "binary_io.hpp"

namespace ada {

namespace fs = std::filesystem;

bool AudioDictionary::contains(std::string_view token) const {
  return pools_.find(token) != pools_.end();
}

std::span<const SegmentEntry> AudioDictionary::pool(std::string_view token) const {
  auto it = pools_.find(token);
  if (it == pools_.end()) return {};
  return it->second;
}

void AudioDictionary::insert(const std::string& token, SegmentEntry entry) {
  if (entry.data.n_dims() != n_dims_) {
    throw Error(Errc::DimensionMismatch, "segment has " + std::to_string(entry.data.n_dims()) +
                                             " dims, dictionary has " + std::to_string(n_dims_));
  }
  auto [it, inserted] = pools_.try_emplace(token);
  if (inserted) keys_.insert(std::lower_bound(keys_.begin(), keys_.end(), token), token);
  it->second.push_back(std::move(entry));
}

void AudioDictionary::replace(const std::string& token, std::size_t index, SegmentEntry entry) {
  auto it = pools_.find(token);
  if (it == pools_.end() || index >= it->second.size()) {
    throw Error(Errc::InvalidArgument, "no pool slot " + std::to_string(index) + " for '" + token + "'");
  }
  if (entry.data.n_dims() != n_dims_) throw Error(Errc::DimensionMismatch, token);
  it->second[index] = std::move(entry);
}

// ---------------------------------------------------------------------------

DictionaryBuilder::DictionaryBuilder(BuildOptions opts) : opts_(opts), rng_(opts.seed) {}

void DictionaryBuilder::add(const Utterance& u, const AlignedUtterance& a) {
  if (!dict_) dict_.emplace(u.features.n_dims());
  if (u.features.n_dims() != dict_->n_dims()) {
    throw Error(Errc::DimensionMismatch, u.utt_id + ": " + std::to_string(u.features.n_dims()) +
                                             " dims vs " + std::to_string(dict_->n_dims()));
  }
  const AlignedUtterance clamped = validate(a, u.features.n_frames());
  for (const auto& span : clamped.spans) {
    const std::uint64_t id = next_id_++;
    if (span.width() < opts_.min_frames) continue;
    SegmentEntry entry{id, u.utt_id, span.start_frame, span.end_frame,
                       u.features.slice(span.start_frame, span.end_frame)};
    auto& seen = seen_per_token_[span.token];
    ++seen;
    if (opts_.max_pool == 0 || seen <= opts_.max_pool) {
      dict_->insert(span.token, std::move(entry));
    } else {
      // Reservoir sampling (algorithm R): the pool stays a uniform sample of
      // every segment seen for this token.
      const std::size_t j = rng_.index(seen);
      if (j < opts_.max_pool) dict_->replace(span.token, j, std::move(entry));
    }
  }
}

AudioDictionary DictionaryBuilder::finish() && {
  if (!dict_) return AudioDictionary{};
  return std::move(*dict_);
}

namespace {

std::unordered_map<std::string_view, const AlignedUtterance*> index_alignments(
    const std::vector<AlignedUtterance>& alignments) {
  std::unordered_map<std::string_view, const AlignedUtterance*> by_id;
  for (const auto& a : alignments) by_id.emplace(a.utt_id, &a);
  return by_id;
}

template <typename Ids>
void check_known(const std::vector<AlignedUtterance>& alignments, const Ids& corpus_ids) {
  for (const auto& a : alignments) {
    if (!corpus_ids.contains(a.utt_id)) {
      throw Error(Errc::UnknownUtterance, a.utt_id + " is aligned but not in the corpus");
    }
  }
}

}  // namespace

AudioDictionary build_dictionary(const CorpusManifest& corpus,
                                 const std::vector<AlignedUtterance>& alignments,
                                 const BuildOptions& opts) {
  std::unordered_map<std::string_view, const ManifestEntry*> ids;
  for (const auto& e : corpus.entries) ids.emplace(e.utt_id, &e);
  check_known(alignments, ids);

  const auto by_id = index_alignments(alignments);
  DictionaryBuilder builder(opts);
  for (const auto& e : corpus.entries) {
    auto it = by_id.find(e.utt_id);
    if (it == by_id.end()) continue;
    builder.add(load_utterance(e), *it->second);
  }
  return std::move(builder).finish();
}

AudioDictionary build_dictionary(const std::vector<Utterance>& corpus,
                                 const std::vector<AlignedUtterance>& alignments,
                                 const BuildOptions& opts) {
  std::unordered_map<std::string_view, const Utterance*> ids;
  for (const auto& u : corpus) ids.emplace(u.utt_id, &u);
  check_known(alignments, ids);

  const auto by_id = index_alignments(alignments);
  DictionaryBuilder builder(opts);
  for (const auto& u : corpus) {
    auto it = by_id.find(u.utt_id);
    if (it != by_id.end()) builder.add(u, *it->second);
  }
  return std::move(builder).finish();
}

const SegmentEntry* sample(const AudioDictionary& d, std::string_view token, Rng& rng,
                           const std::optional<SegmentOrigin>& exclude) {
  const auto pool = d.pool(token);
  if (pool.empty()) return nullptr;

  std::size_t skip = pool.size();
  if (exclude) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].start_frame == exclude->start_frame &&
          pool[i].source_utt_id == exclude->source_utt_id) {
        skip = i;
        break;
      }
    }
  }
  if (skip == pool.size()) return &pool[rng.index(pool.size())];
  if (pool.size() == 1) return &pool[0];
  std::size_t i = rng.index(pool.size() - 1);
  if (i >= skip) ++i;
  return &pool[i];
}

DictStats stats(const AudioDictionary& d) {
  DictStats s;
  s.n_keys = d.n_keys();
  for (const auto& [token, pool] : d.pools()) {
    s.n_segments += pool.size();
    ++s.pool_size_histogram[pool.size()];
    for (const auto& seg : pool) s.total_frames += seg.n_frames();
  }
  return s;
}

// ---------------------------------------------------------------------------
// ADAD

namespace {
constexpr char kAdadMagic[4] = {'A', 'D', 'A', 'D'};
}

void save(const AudioDictionary& d, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot create " + path.string());
  out.write(kAdadMagic, 4);
  detail::put_le<std::uint16_t>(out, kAdadVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.n_dims()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.n_keys()));
  for (const auto& [token, pool] : d.pools()) {
    detail::put_string<std::uint16_t>(out, token);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(pool.size()));
    for (const auto& seg : pool) {
      detail::put_le<std::uint64_t>(out, seg.segment_id);
      detail::put_string<std::uint16_t>(out, seg.source_utt_id);
      detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(seg.start_frame));
      detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(seg.end_frame));
      detail::put_f32_block(out, seg.data.data());
    }
  }
  out.flush();
  if (!out) throw Error(Errc::IoFailure, "write failed: " + path.string());
}

AudioDictionary load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  detail::Reader r(in, path.string());

  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kAdadMagic, 4) != 0) {
    throw Error(Errc::BadMagic, path.string());
  }
  const auto version = r.le<std::uint16_t>();
  if (version != kAdadVersion) {
    throw Error(Errc::VersionMismatch, path.string() + ": version " + std::to_string(version));
  }
  const auto n_dims = r.le<std::uint32_t>();
  if (n_dims == 0) throw Error(Errc::InvalidArgument, path.string() + ": n_dims is 0");
  const auto n_keys = r.le<std::uint32_t>();

  AudioDictionary d(n_dims);
  for (std::uint32_t k = 0; k < n_keys; ++k) {
    const auto token = r.string<std::uint16_t>();
    const auto pool_size = r.le<std::uint32_t>();
    if (token.empty() || pool_size == 0 || d.contains(token)) {
      throw Error(Errc::InvalidArgument, path.string() + ": bad key entry '" + token + "'");
    }
    for (std::uint32_t s = 0; s < pool_size; ++s) {
      SegmentEntry seg;
      seg.segment_id = r.le<std::uint64_t>();
      seg.source_utt_id = r.string<std::uint16_t>();
      seg.start_frame = r.le<std::uint32_t>();
      seg.end_frame = r.le<std::uint32_t>();
      if (seg.end_frame <= seg.start_frame) {
        throw Error(Errc::InvalidArgument, path.string() + ": empty segment for '" + token + "'");
      }
      std::vector<float> payload(seg.n_frames() * n_dims);
      r.f32_block(payload);
      seg.data = FeatureMatrix(seg.n_frames(), n_dims, std::move(payload));
      d.insert(token, std::move(seg));
    }
  }
  if (!r.at_end()) throw Error(Errc::InvalidArgument, path.string() + ": trailing bytes");
  return d;
}

}  // namespace ada

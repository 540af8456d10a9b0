#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ada/alignment.hpp"
#include "ada/audiodict.hpp"
#include "ada/candidates.hpp"
#include "ada/features.hpp"
#include "ada/rng.hpp"
#include "ada/schedule.hpp"

namespace ada {

enum class AugmentMode { SpecAugmentOnly, LanguageModelOnly, AudioDictOnly, AdaLM, AdaRT };

/// CLI spelling: specaugment, lm-only, dict-only, ada-lm, ada-rt.
std::string_view to_string(AugmentMode mode) noexcept;
AugmentMode parse_augment_mode(std::string_view name);

struct SpecAugmentParams {
  std::size_t freq_mask_param = 30;  // F: max frequency-mask width
  std::size_t n_freq_masks = 2;
  std::size_t time_mask_param = 40;  // T: max time-mask width
  std::size_t n_time_masks = 2;
};

enum class MaskAxis { Frequency, Time };

struct MaskRect {
  MaskAxis axis;
  std::size_t start;
  std::size_t width;
  friend bool operator==(const MaskRect&, const MaskRect&) = default;
};

enum class MaskValueMode { Constant, UtteranceMean };

struct AugmentConfig {
  AugmentMode mode = AugmentMode::AdaRT;
  SpecAugmentParams spec;
  float mask_value = 0.0f;
  MaskValueMode mask_value_mode = MaskValueMode::Constant;
  MixtureSchedule schedule = kLibri100;
  std::size_t lm_top_k = 5;
  double lm_temperature = 1.0;
  bool lm_argmax = false;  // always take the top candidate
  bool lm_retry = false;   // try lower-ranked candidates before masking
  std::size_t max_frames = 3000;
  bool exclude_own_segment = true;
  std::uint64_t base_seed = 0;

  void check() const;
};

enum class ReplacementAction { Spliced, Masked, Unchanged };
std::string_view to_string(ReplacementAction action) noexcept;

struct Replacement {
  std::size_t position = 0;
  std::string original_token;
  std::string new_token;
  ReplacementAction action = ReplacementAction::Unchanged;
  std::optional<std::uint64_t> segment_id;  // set for Spliced
  friend bool operator==(const Replacement&, const Replacement&) = default;
};

/// Audit record of one utterance's augmentation.
struct AugmentTrace {
  std::string utt_id;
  std::uint64_t epoch = 0;
  AugmentMode mode_assigned = AugmentMode::SpecAugmentOnly;
  std::vector<Replacement> replacements;  // ascending position
  std::size_t n_frames_before = 0;
  std::size_t n_frames_after = 0;
  std::vector<MaskRect> spec_augment_masks;
  std::string note;  // fallbacks and pass-through reasons; empty otherwise
  friend bool operator==(const AugmentTrace&, const AugmentTrace&) = default;
};

struct AugmentResult {
  Utterance utterance;
  std::vector<TokenSpan> spans;  // empty when the utterance had no usable alignment
  AugmentTrace trace;
};

/// Frequency masks first, then time masks. Widths are uniform in
/// {0..min(F, n_dims)} and {0..min(T, n_frames)}, offsets uniform over the
/// valid range. Every drawn rectangle is appended to `masks` when given.
FeatureMatrix spec_augment(const FeatureMatrix& m, const SpecAugmentParams& params,
                           float mask_value, Rng& rng, std::vector<MaskRect>* masks = nullptr);

struct SpliceResult {
  Utterance utterance;
  std::vector<TokenSpan> spans;
};

/// Replaces the frames of spans[position] with the segment, re-widths that
/// span and shifts every later span by the length delta. The transcript is
/// left to the caller. Throws DimensionMismatch, SpanOutOfRange.
SpliceResult splice(const Utterance& u, const std::vector<TokenSpan>& spans, std::size_t position,
                    const SegmentEntry& segment);

/// Sets rows [start, end) to mask_value. Throws SpanOutOfRange.
FeatureMatrix mask_span(const FeatureMatrix& m, std::size_t start, std::size_t end,
                        float mask_value);

/// Augments one utterance with the fixed mode cfg.mode, replacing
/// n_replacements(tokens, f) positions (f_dict_tok for AudioDictOnly,
/// f_aligned_tok otherwise). `a` must be validated against `u` and carry the
/// transcript's tokens. Predictor errors propagate; everything else ends in
/// a fallback recorded in the trace. `predictor` may be null unless the
/// mode queries the LM.
AugmentResult augment_utterance(const Utterance& u, const AlignedUtterance& a,
                                const AudioDictionary& d, const Predictor* predictor,
                                const AugmentConfig& cfg, std::uint64_t epoch);

/// One step of the scheduled stream: draws the sentence mode from
/// cfg.schedule, then augments. A null or unusable alignment means the
/// utterance passes through with SpecAugment only and a trace note.
AugmentResult augment_scheduled(const Utterance& u, const AlignedUtterance* a,
                                const AudioDictionary& d, const Predictor* predictor,
                                const AugmentConfig& cfg, std::uint64_t epoch);

/// Random-access utterance provider for the stream.
class UtteranceSource {
 public:
  virtual ~UtteranceSource() = default;
  virtual std::size_t size() const = 0;
  virtual Utterance load(std::size_t index) const = 0;
};

class ManifestSource final : public UtteranceSource {
 public:
  explicit ManifestSource(const CorpusManifest& manifest) : manifest_(manifest) {}
  std::size_t size() const override { return manifest_.size(); }
  Utterance load(std::size_t index) const override { return load_utterance(manifest_.entries[index]); }

 private:
  const CorpusManifest& manifest_;
};

class MemorySource final : public UtteranceSource {
 public:
  explicit MemorySource(const std::vector<Utterance>& utterances) : utterances_(utterances) {}
  std::size_t size() const override { return utterances_.size(); }
  Utterance load(std::size_t index) const override { return utterances_[index]; }

 private:
  const std::vector<Utterance>& utterances_;
};

/// On-the-fly augmentation over a corpus. Results come out in corpus order
/// whatever the worker count, and each one is a pure function of the inputs,
/// cfg.base_seed and the epoch.
class AugmentStream {
 public:
  AugmentStream(const UtteranceSource& source, const std::vector<AlignedUtterance>& alignments,
                const AudioDictionary& dict, const Predictor* predictor, AugmentConfig cfg,
                std::uint64_t epoch, std::size_t workers = 1);

  /// Next result, or nullopt at the end. Rethrows worker failures.
  std::optional<AugmentResult> next();

 private:
  void fill_batch();

  const UtteranceSource& source_;
  const AudioDictionary& dict_;
  const Predictor* predictor_;
  AugmentConfig cfg_;
  std::uint64_t epoch_;
  std::size_t workers_;
  std::unordered_map<std::string, const AlignedUtterance*> alignments_;
  std::size_t next_index_ = 0;
  std::deque<AugmentResult> ready_;
};

/// ADAB record: utt_id (u16 len + UTF-8), transcript (u32 len + UTF-8),
/// n_frames u32, n_dims u32, f32 payload; all little-endian.
void write_adab_record(std::ostream& out, const Utterance& u);
/// nullopt at a clean end of stream; TruncatedFile on a partial record.
std::optional<Utterance> read_adab_record(std::istream& in);

/// Single-line JSON rendering of a trace (keys sorted).
std::string format_trace(const AugmentTrace& trace);

}  // namespace ada

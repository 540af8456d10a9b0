#include "ada/augment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "ada/error.hpp"
#include "binary_io.hpp"

namespace ada {

std::string_view to_string(AugmentMode mode) noexcept {
  switch (mode) {
    case AugmentMode::SpecAugmentOnly: return "specaugment";
    case AugmentMode::LanguageModelOnly: return "lm-only";
    case AugmentMode::AudioDictOnly: return "dict-only";
    case AugmentMode::AdaLM: return "ada-lm";
    case AugmentMode::AdaRT: return "ada-rt";
  }
  return "?";
}

AugmentMode parse_augment_mode(std::string_view name) {
  for (auto m : {AugmentMode::SpecAugmentOnly, AugmentMode::LanguageModelOnly,
                 AugmentMode::AudioDictOnly, AugmentMode::AdaLM, AugmentMode::AdaRT}) {
    if (to_string(m) == name) return m;
  }
  throw Error(Errc::InvalidArgument, "unknown augmentation mode '" + std::string(name) + "'");
}

std::string_view to_string(ReplacementAction action) noexcept {
  switch (action) {
    case ReplacementAction::Spliced: return "SPLICED";
    case ReplacementAction::Masked: return "MASKED";
    case ReplacementAction::Unchanged: return "UNCHANGED";
  }
  return "?";
}

void AugmentConfig::check() const {
  schedule.check();
  if (lm_top_k == 0) throw Error(Errc::InvalidArgument, "lm_top_k must be >= 1");
  if (!(lm_temperature > 0.0)) throw Error(Errc::InvalidArgument, "lm_temperature must be > 0");
  if (!std::isfinite(mask_value)) throw Error(Errc::NonFiniteValue, "mask_value");
}

// ---------------------------------------------------------------------------
// Primitive transforms

FeatureMatrix spec_augment(const FeatureMatrix& m, const SpecAugmentParams& params,
                           float mask_value, Rng& rng, std::vector<MaskRect>* masks) {
  FeatureMatrix out = m;
  const std::size_t n_dims = m.n_dims();
  const std::size_t n_frames = m.n_frames();

  const std::size_t max_f = std::min(params.freq_mask_param, n_dims);
  for (std::size_t i = 0; i < params.n_freq_masks; ++i) {
    const auto width = static_cast<std::size_t>(rng.uniform_int(0, max_f));
    const auto start = static_cast<std::size_t>(rng.uniform_int(0, n_dims - width));
    for (std::size_t t = 0; t < n_frames; ++t) {
      auto row = out.row(t);
      std::fill(row.begin() + static_cast<std::ptrdiff_t>(start),
                row.begin() + static_cast<std::ptrdiff_t>(start + width), mask_value);
    }
    if (masks) masks->push_back({MaskAxis::Frequency, start, width});
  }

  const std::size_t max_t = std::min(params.time_mask_param, n_frames);
  for (std::size_t i = 0; i < params.n_time_masks; ++i) {
    const auto width = static_cast<std::size_t>(rng.uniform_int(0, max_t));
    const auto start = static_cast<std::size_t>(rng.uniform_int(0, n_frames - width));
    for (std::size_t t = start; t < start + width; ++t) {
      auto row = out.row(t);
      std::fill(row.begin(), row.end(), mask_value);
    }
    if (masks) masks->push_back({MaskAxis::Time, start, width});
  }
  return out;
}

SpliceResult splice(const Utterance& u, const std::vector<TokenSpan>& spans, std::size_t position,
                    const SegmentEntry& segment) {
  if (position >= spans.size()) {
    throw Error(Errc::SpanOutOfRange, u.utt_id + ": no span at position " + std::to_string(position));
  }
  const auto& target = spans[position];
  const FeatureMatrix& src = u.features;
  if (segment.data.n_dims() != src.n_dims()) {
    throw Error(Errc::DimensionMismatch, u.utt_id + ": segment has " +
                                             std::to_string(segment.data.n_dims()) + " dims, utterance " +
                                             std::to_string(src.n_dims()));
  }
  if (target.start_frame >= target.end_frame || target.end_frame > src.n_frames()) {
    throw Error(Errc::SpanOutOfRange, u.utt_id + ": span '" + target.token + "' outside the features");
  }

  const std::size_t dims = src.n_dims();
  const std::size_t seg_frames = segment.data.n_frames();
  const std::size_t new_frames = src.n_frames() - target.width() + seg_frames;

  std::vector<float> data;
  data.reserve(new_frames * dims);
  const auto in = src.data();
  data.insert(data.end(), in.begin(), in.begin() + static_cast<std::ptrdiff_t>(target.start_frame * dims));
  const auto seg = segment.data.data();
  data.insert(data.end(), seg.begin(), seg.end());
  data.insert(data.end(), in.begin() + static_cast<std::ptrdiff_t>(target.end_frame * dims), in.end());

  SpliceResult out{Utterance{u.utt_id, FeatureMatrix(new_frames, dims, std::move(data), src.frame_rate()),
                             u.transcript},
                   spans};
  auto& spliced = out.spans[position];
  spliced.end_frame = spliced.start_frame + seg_frames;
  for (std::size_t i = position + 1; i < out.spans.size(); ++i) {
    out.spans[i].start_frame = out.spans[i].start_frame - target.end_frame + spliced.end_frame;
    out.spans[i].end_frame = out.spans[i].end_frame - target.end_frame + spliced.end_frame;
  }
  return out;
}

FeatureMatrix mask_span(const FeatureMatrix& m, std::size_t start, std::size_t end, float mask_value) {
  if (start >= end || end > m.n_frames()) {
    throw Error(Errc::SpanOutOfRange, "mask [" + std::to_string(start) + ", " + std::to_string(end) +
                                          ") of " + std::to_string(m.n_frames()) + " frames");
  }
  FeatureMatrix out = m;
  auto data = out.data();
  std::fill(data.begin() + static_cast<std::ptrdiff_t>(start * m.n_dims()),
            data.begin() + static_cast<std::ptrdiff_t>(end * m.n_dims()), mask_value);
  return out;
}

// ---------------------------------------------------------------------------
// Per-utterance engine

namespace {

float mask_value_for(const FeatureMatrix& m, const AugmentConfig& cfg) {
  if (cfg.mask_value_mode == MaskValueMode::Constant || m.data().empty()) return cfg.mask_value;
  double sum = 0.0;
  for (float v : m.data()) sum += v;
  return static_cast<float>(sum / static_cast<double>(m.data().size()));
}

/// k distinct positions out of n, in descending order.
std::vector<std::size_t> pick_positions(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end(), std::greater<>());
  return idx;
}

bool queries_lm(AugmentMode mode) {
  return mode == AugmentMode::AdaLM || mode == AugmentMode::LanguageModelOnly;
}

struct Work {
  Utterance utt;
  std::vector<TokenSpan> spans;
};

const std::string* pick_lm_token(const CandidateSet& cs, const AudioDictionary& d,
                                 const AugmentConfig& cfg, Rng& rng, bool needs_audio) {
  if (cs.candidates.empty()) return nullptr;
  const std::string* chosen =
      cfg.lm_argmax ? &cs.candidates.front().token : &choose(cs, rng, cfg.lm_temperature);
  if (needs_audio && cfg.lm_retry && !d.contains(*chosen)) {
    for (const auto& c : cs.candidates) {
      if (d.contains(c.token)) return &c.token;
    }
  }
  return chosen;
}

/// Applies `mode` to `k` random positions of `work`, recording each decision.
void apply_replacements(Work& work, AugmentMode mode, std::size_t k, const AudioDictionary& d,
                        const Predictor* predictor, const AugmentConfig& cfg, float mask_value,
                        Rng& rng, std::vector<Replacement>& log) {
  if (mode == AugmentMode::SpecAugmentOnly || k == 0) return;
  const auto positions = pick_positions(work.spans.size(), k, rng);

  std::unordered_map<std::size_t, CandidateSet> lm;
  if (queries_lm(mode)) {
    if (predictor == nullptr) {
      throw Error(Errc::InvalidArgument, std::string(to_string(mode)) + " needs a predictor");
    }
    std::vector<std::size_t> ascending(positions.rbegin(), positions.rend());
    for (auto& cs : predictor->predict(work.utt.transcript, ascending, cfg.lm_top_k)) {
      lm.emplace(cs.position, std::move(cs));
    }
  }

  const std::string& utt_id = work.utt.utt_id;
  for (const std::size_t pos : positions) {
    const TokenSpan span = work.spans[pos];
    Replacement r{pos, span.token, span.token, ReplacementAction::Unchanged, std::nullopt};
    std::optional<SegmentOrigin> own;
    if (cfg.exclude_own_segment) own = SegmentOrigin{utt_id, span.start_frame};

    auto splice_in = [&](const SegmentEntry& seg) {
      auto res = splice(work.utt, work.spans, pos, seg);
      work.utt = std::move(res.utterance);
      work.spans = std::move(res.spans);
      r.action = ReplacementAction::Spliced;
      r.segment_id = seg.segment_id;
    };
    auto set_token = [&](const std::string& token) {
      r.new_token = token;
      work.spans[pos].token = token;
      work.utt.transcript[pos] = token;
    };

    switch (mode) {
      case AugmentMode::AudioDictOnly:
        if (const auto* seg = sample(d, span.token, rng, own)) splice_in(*seg);
        break;

      case AugmentMode::AdaRT:
        if (!d.keys().empty()) {
          const std::string token = random_token(d.keys(), rng, span.token);
          if (const auto* seg = sample(d, token, rng, own)) {
            splice_in(*seg);
            set_token(token);
          }
        }
        break;

      case AugmentMode::AdaLM:
        if (const auto* token = pick_lm_token(lm.at(pos), d, cfg, rng, true)) {
          const std::string chosen = *token;
          if (const auto* seg = sample(d, chosen, rng, own)) {
            splice_in(*seg);
          } else {
            work.utt.features = mask_span(work.utt.features, span.start_frame, span.end_frame, mask_value);
            r.action = ReplacementAction::Masked;
          }
          set_token(chosen);
        }
        break;

      case AugmentMode::LanguageModelOnly:
        if (const auto* token = pick_lm_token(lm.at(pos), d, cfg, rng, false)) set_token(std::string(*token));
        break;

      case AugmentMode::SpecAugmentOnly:
        break;
    }
    log.push_back(std::move(r));
  }
  std::reverse(log.begin(), log.end());
}

double token_fraction(AugmentMode mode, const MixtureSchedule& s) {
  return mode == AugmentMode::AudioDictOnly ? s.f_dict_tok : s.f_aligned_tok;
}

/// Shared tail of both entry points: replacements, over-length fallback,
/// then SpecAugment.
AugmentResult run(const Utterance& u, const AlignedUtterance* a, const AudioDictionary& d,
                  const Predictor* predictor, const AugmentConfig& cfg, std::uint64_t epoch,
                  AugmentMode mode, double fraction, Rng& rng, std::string note) {
  AugmentTrace trace;
  trace.utt_id = u.utt_id;
  trace.epoch = epoch;
  trace.mode_assigned = mode;
  trace.n_frames_before = u.features.n_frames();
  trace.note = std::move(note);

  const float mask_value = mask_value_for(u.features, cfg);
  Work work{u, a ? a->spans : std::vector<TokenSpan>{}};

  if (mode != AugmentMode::SpecAugmentOnly) {
    const std::size_t k = n_replacements(work.spans.size(), fraction);
    apply_replacements(work, mode, k, d, predictor, cfg, mask_value, rng, trace.replacements);
    if (work.utt.features.n_frames() > cfg.max_frames) {
      trace.note = "over_length_fallback: " + std::to_string(work.utt.features.n_frames()) +
                   " frames > " + std::to_string(cfg.max_frames);
      trace.replacements.clear();
      work = Work{u, a->spans};
    }
  }

  work.utt.features = spec_augment(work.utt.features, cfg.spec, mask_value, rng, &trace.spec_augment_masks);
  trace.n_frames_after = work.utt.features.n_frames();
  return AugmentResult{std::move(work.utt), std::move(work.spans), std::move(trace)};
}

/// Returns a reason when `a` cannot drive replacements on `u`.
std::optional<std::string> alignment_problem(const Utterance& u, const AlignedUtterance* a) {
  if (a == nullptr) return "no_alignment";
  if (!spans_consistent(a->spans, u.features.n_frames())) return "invalid_alignment";
  if (a->spans.size() != u.transcript.size()) return "alignment_transcript_mismatch";
  for (std::size_t i = 0; i < a->spans.size(); ++i) {
    if (a->spans[i].token != u.transcript[i]) return "alignment_transcript_mismatch";
  }
  return std::nullopt;
}

}  // namespace

AugmentResult augment_utterance(const Utterance& u, const AlignedUtterance& a,
                                const AudioDictionary& d, const Predictor* predictor,
                                const AugmentConfig& cfg, std::uint64_t epoch) {
  Rng rng(utterance_seed(cfg.base_seed, epoch, u.utt_id));
  const auto problem = alignment_problem(u, &a);
  if (problem && cfg.mode != AugmentMode::SpecAugmentOnly) {
    throw Error(Errc::SpanOutOfRange, u.utt_id + ": " + *problem);
  }
  return run(u, problem ? nullptr : &a, d, predictor, cfg, epoch, cfg.mode,
             token_fraction(cfg.mode, cfg.schedule), rng, {});
}

AugmentResult augment_scheduled(const Utterance& u, const AlignedUtterance* a,
                                const AudioDictionary& d, const Predictor* predictor,
                                const AugmentConfig& cfg, std::uint64_t epoch) {
  Rng rng(utterance_seed(cfg.base_seed, epoch, u.utt_id));
  const SentenceMode sentence = assign_mode(rng.uniform01(), cfg.schedule);

  AugmentMode mode = AugmentMode::SpecAugmentOnly;
  double fraction = 0.0;
  switch (cfg.mode) {
    case AugmentMode::SpecAugmentOnly:
      break;
    case AugmentMode::AdaLM:
    case AugmentMode::AdaRT:
      if (sentence == SentenceMode::Aligned) {
        mode = cfg.mode;
        fraction = cfg.schedule.f_aligned_tok;
      } else if (sentence == SentenceMode::DictOnly) {
        mode = AugmentMode::AudioDictOnly;
        fraction = cfg.schedule.f_dict_tok;
      }
      break;
    case AugmentMode::LanguageModelOnly:
    case AugmentMode::AudioDictOnly:
      // Single-sided ablations use only the aligned share of the schedule.
      if (sentence == SentenceMode::Aligned) {
        mode = cfg.mode;
        fraction = cfg.schedule.f_aligned_tok;
      }
      break;
  }

  std::string note;
  const auto problem = alignment_problem(u, a);
  if (problem && mode != AugmentMode::SpecAugmentOnly) {
    note = *problem + "_passthrough";
    mode = AugmentMode::SpecAugmentOnly;
  }
  return run(u, problem ? nullptr : a, d, predictor, cfg, epoch, mode, fraction, rng, std::move(note));
}

// ---------------------------------------------------------------------------
// Stream

AugmentStream::AugmentStream(const UtteranceSource& source,
                             const std::vector<AlignedUtterance>& alignments,
                             const AudioDictionary& dict, const Predictor* predictor,
                             AugmentConfig cfg, std::uint64_t epoch, std::size_t workers)
    : source_(source),
      dict_(dict),
      predictor_(predictor),
      cfg_(std::move(cfg)),
      epoch_(epoch),
      workers_(std::max<std::size_t>(1, workers)) {
  cfg_.check();
  for (const auto& a : alignments) alignments_.emplace(a.utt_id, &a);
}

std::optional<AugmentResult> AugmentStream::next() {
  if (ready_.empty()) fill_batch();
  if (ready_.empty()) return std::nullopt;
  auto out = std::move(ready_.front());
  ready_.pop_front();
  return out;
}

void AugmentStream::fill_batch() {
  const std::size_t begin = next_index_;
  const std::size_t end = std::min(source_.size(), begin + workers_ * 32);
  if (begin >= end) return;
  next_index_ = end;

  std::vector<std::optional<AugmentResult>> slots(end - begin);
  std::atomic<std::size_t> cursor{begin};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t i = cursor++; i < end; i = cursor++) {
      try {
        Utterance u = source_.load(i);
        auto it = alignments_.find(u.utt_id);
        const AlignedUtterance* a = it == alignments_.end() ? nullptr : it->second;
        std::optional<AlignedUtterance> clamped;
        if (a != nullptr) {
          try {
            clamped = validate(*a, u.features.n_frames());
            a = &*clamped;
          } catch (const Error&) {
            // left for augment_scheduled to report as a pass-through
          }
        }
        slots[i - begin] = augment_scheduled(u, a, dict_, predictor_, cfg_, epoch_);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        cursor = end;
      }
    }
  };

  const std::size_t n_threads = std::min(workers_, end - begin);
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  for (auto& s : slots) ready_.push_back(std::move(*s));
}

// ---------------------------------------------------------------------------
// Serialization

void write_adab_record(std::ostream& out, const Utterance& u) {
  const auto& m = u.features;
  detail::put_string<std::uint16_t>(out, u.utt_id);
  detail::put_string<std::uint32_t>(out, join_tokens(u.transcript));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.n_frames()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.n_dims()));
  detail::put_f32_block(out, m.data());
  if (!out) throw Error(Errc::IoFailure, "ADAB write failed for " + u.utt_id);
}

std::optional<Utterance> read_adab_record(std::istream& in) {
  detail::Reader r(in, "ADAB stream");
  if (r.at_end()) return std::nullopt;
  Utterance u;
  u.utt_id = r.string<std::uint16_t>();
  u.transcript = tokenize_transcript(r.string<std::uint32_t>());
  const auto n_frames = r.le<std::uint32_t>();
  const auto n_dims = r.le<std::uint32_t>();
  if (n_dims == 0) throw Error(Errc::InvalidArgument, "ADAB record with n_dims 0");
  std::vector<float> data(static_cast<std::size_t>(n_frames) * n_dims);
  r.f32_block(data);
  u.features = FeatureMatrix(n_frames, n_dims, std::move(data));
  return u;
}

std::string format_trace(const AugmentTrace& t) {
  using nlohmann::json;
  json j;
  j["utt_id"] = t.utt_id;
  j["epoch"] = t.epoch;
  j["mode_assigned"] = std::string(to_string(t.mode_assigned));
  j["n_frames_before"] = t.n_frames_before;
  j["n_frames_after"] = t.n_frames_after;
  j["replacements"] = json::array();
  for (const auto& r : t.replacements) {
    json jr{{"position", r.position},
            {"original_token", r.original_token},
            {"new_token", r.new_token},
            {"action", std::string(to_string(r.action))}};
    if (r.segment_id) jr["segment_id"] = *r.segment_id;
    j["replacements"].push_back(std::move(jr));
  }
  j["spec_augment_masks"] = json::array();
  for (const auto& m : t.spec_augment_masks) {
    j["spec_augment_masks"].push_back(
        {{"axis", m.axis == MaskAxis::Frequency ? "freq" : "time"}, {"start", m.start}, {"width", m.width}});
  }
  if (!t.note.empty()) j["note"] = t.note;
  return j.dump();
}

}  // namespace ada

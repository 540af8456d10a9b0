#include <doctest.h>

#include <json.hpp>

#include <sstream>

#include "ada/augment.hpp"
#include "ada/error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ada;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ada::Error");
  return Errc::InvalidArgument;
}

SpecAugmentParams no_spec() { return SpecAugmentParams{0, 0, 0, 0}; }

// An utterance with one span per token, each span `width` frames of a
// distinct constant value.
Utterance striped(const std::string& id, const std::vector<std::string>& words, std::size_t width,
                  float base, std::size_t dims = 3) {
  FeatureMatrix m(words.size() * width, dims);
  for (std::size_t t = 0; t < m.n_frames(); ++t) {
    for (std::size_t d = 0; d < dims; ++d) m.at(t, d) = base + static_cast<float>(t / width);
  }
  return Utterance{id, std::move(m), words};
}

AlignedUtterance tiled(const Utterance& u, std::size_t width) {
  AlignedUtterance a{u.utt_id, {}};
  for (std::size_t i = 0; i < u.transcript.size(); ++i) {
    a.spans.push_back({u.transcript[i], i * width, (i + 1) * width});
  }
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// SpecAugment

TEST_CASE("SpecAugment changes only cells inside recorded rectangles") {
  Rng gen(2718);
  const float mask = 100.0f;  // outside the generated value range
  const SpecAugmentParams params;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t frames = gen.index(120), dims = 1 + gen.index(100);
    const auto m = test::random_matrix(frames, dims, gen);
    std::vector<MaskRect> rects;
    Rng rng(static_cast<std::uint64_t>(trial));
    const auto out = spec_augment(m, params, mask, rng, &rects);
    REQUIRE(out.n_frames() == frames);
    REQUIRE(out.n_dims() == dims);
    REQUIRE(rects.size() == 4);

    REQUIRE(test::spec_augment_consistent(m, out, rects, params, mask));
  }
}

TEST_CASE("SpecAugment widths reach both ends of their range") {
  Rng rng(1);
  std::set<std::size_t> freq_widths, time_widths;
  const FeatureMatrix m(200, 80);
  for (int i = 0; i < 3000; ++i) {
    std::vector<MaskRect> rects;
    spec_augment(m, SpecAugmentParams{}, 0.0f, rng, &rects);
    for (const auto& r : rects) (r.axis == MaskAxis::Frequency ? freq_widths : time_widths).insert(r.width);
  }
  CHECK(freq_widths.size() == 31);
  CHECK(*freq_widths.rbegin() == 30);
  CHECK(time_widths.size() == 41);
  CHECK(*time_widths.rbegin() == 40);
}

TEST_CASE("SpecAugment degenerate parameters") {
  Rng rng(4);
  const auto m = test::random_matrix(30, 80, rng);
  std::vector<MaskRect> rects;
  CHECK(spec_augment(m, SpecAugmentParams{0, 2, 0, 2}, 0.0f, rng, &rects) == m);
  for (const auto& r : rects) CHECK(r.width == 0);

  // One frame, one time mask of width <= 1: whenever the width is 1 the
  // whole row is masked.
  const FeatureMatrix ones(1, 80, std::vector<float>(80, 1.0f));
  bool saw_full = false;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(seed);
    std::vector<MaskRect> got;
    const auto out = spec_augment(ones, SpecAugmentParams{0, 0, 1, 1}, -3.0f, r, &got);
    REQUIRE(got.size() == 1);
    if (got[0].width == 1) {
      saw_full = true;
      for (float v : out.data()) REQUIRE(v == -3.0f);
    } else {
      REQUIRE(out == ones);
    }
  }
  CHECK(saw_full);

  // Empty matrices pass through.
  const FeatureMatrix empty(0, 80);
  CHECK(spec_augment(empty, SpecAugmentParams{}, 0.0f, rng) == empty);
}

// ---------------------------------------------------------------------------
// Splice and mask

TEST_CASE("splice length arithmetic") {
  Utterance u{"u", FeatureMatrix(100, 2), {"a", "b", "c"}};
  const std::vector<TokenSpan> spans{{"a", 0, 40}, {"b", 40, 60}, {"c", 70, 80}};
  const SegmentEntry seg{1, "x", 0, 30, FeatureMatrix(30, 2)};
  const auto r = splice(u, spans, 1, seg);
  CHECK(r.utterance.features.n_frames() == 110);
  CHECK(r.spans[0] == TokenSpan{"a", 0, 40});
  CHECK(r.spans[1] == TokenSpan{"b", 40, 70});
  CHECK(r.spans[2] == TokenSpan{"c", 80, 90});

  const SegmentEntry same{2, "x", 0, 20, FeatureMatrix(20, 2)};
  const auto r2 = splice(u, spans, 1, same);
  CHECK(r2.utterance.features.n_frames() == 100);
  CHECK(r2.spans == spans);

  CHECK(code_of([&] { splice(u, spans, 3, seg); }) == Errc::SpanOutOfRange);
  const SegmentEntry wide{3, "x", 0, 1, FeatureMatrix(1, 5)};
  CHECK(code_of([&] { splice(u, spans, 0, wide); }) == Errc::DimensionMismatch);
}

TEST_CASE("splice matches the concatenation oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    test::CorpusShape shape;
    shape.n_utterances = 1;
    shape.min_tokens = 1;
    shape.max_tokens = 12;
    shape.dims = 1 + rng.index(6);
    const auto c = test::make_corpus(shape, rng.next_u64());
    const auto& u = c.utterances[0];
    const auto& spans = c.alignments[0].spans;
    const std::size_t pos = rng.index(spans.size());
    const std::size_t seg_len = 1 + rng.index(25);
    const SegmentEntry seg{0, "src", 0, seg_len, test::random_matrix(seg_len, shape.dims, rng)};

    const auto r = splice(u, spans, pos, seg);

    const auto [rows, expect_spans] = test::splice_oracle(u.features, spans, pos, seg.data);
    REQUIRE(test::rows_of(r.utterance.features) == rows);
    REQUIRE(r.spans == expect_spans);
    REQUIRE(spans_consistent(r.spans, r.utterance.features.n_frames()));
    REQUIRE(r.utterance.transcript == u.transcript);
  }
}

TEST_CASE("mask_span") {
  FeatureMatrix m(2, 3, std::vector<float>{1, 2, 3, 4, 5, 6});
  const auto first = mask_span(m, 0, 1, 0.0f);
  CHECK(first.at(0, 0) == 0.0f);
  CHECK(first.at(0, 2) == 0.0f);
  CHECK(first.at(1, 0) == 4.0f);
  const auto all = mask_span(m, 0, 2, -1.0f);
  for (float v : all.data()) CHECK(v == -1.0f);
  CHECK(code_of([&] { mask_span(m, 1, 3, 0.0f); }) == Errc::SpanOutOfRange);
  CHECK(code_of([&] { mask_span(m, 1, 1, 0.0f); }) == Errc::SpanOutOfRange);
}

// ---------------------------------------------------------------------------
// Per-utterance modes

namespace {

const std::vector<std::string> kQuilter = tokenize_transcript(
    "mister quilter is the apostle of the middle classes and we are glad to welcome his gospel");

struct QuilterCase {
  Utterance utt = striped("quilter1", kQuilter, 4, 0.0f);
  AlignedUtterance align = tiled(utt, 4);
  Utterance donor = striped("donor", {"lay", "president"}, 6, 500.0f);
  AudioDictionary dict = build_dictionary(std::vector<Utterance>{donor}, {tiled(donor, 6)});
  MockPredictor lm = MockPredictor::parse("apostle\tpresident:-0.2\nquilter\tlay:-0.1\n");

  AugmentConfig cfg() const {
    AugmentConfig c;
    c.mode = AugmentMode::AdaLM;
    c.spec = no_spec();
    c.schedule.f_aligned_tok = 1.0;
    c.base_seed = 3;
    return c;
  }
};

}  // namespace

TEST_CASE("ADA-LM on the quilter sentence") {
  QuilterCase f;
  const auto r = augment_utterance(f.utt, f.align, f.dict, &f.lm, f.cfg(), 0);
  CHECK(join_tokens(r.utterance.transcript) ==
        "mister lay is the president of the middle classes and we are glad to welcome his gospel");

  std::vector<Replacement> spliced;
  for (const auto& rep : r.trace.replacements) {
    if (rep.action == ReplacementAction::Spliced) spliced.push_back(rep);
  }
  REQUIRE(spliced.size() == 2);
  CHECK(spliced[0].position == 1);
  CHECK(spliced[0].original_token == "quilter");
  CHECK(spliced[0].new_token == "lay");
  CHECK(spliced[1].position == 4);
  CHECK(spliced[1].new_token == "president");
  CHECK(r.trace.replacements.size() == kQuilter.size());

  // Donor spans are 6 frames, originals 4: two splices add 4 frames.
  CHECK(r.utterance.features.n_frames() == f.utt.features.n_frames() + 4);
  CHECK(r.spans[1] == TokenSpan{"lay", 4, 10});
  CHECK(r.spans[4] == TokenSpan{"president", 18, 24});
  CHECK(r.utterance.features.at(4, 0) == 500.0f);
  CHECK(r.utterance.features.at(18, 0) == 501.0f);
  CHECK(spans_consistent(r.spans, r.utterance.features.n_frames()));
}

TEST_CASE("ADA-LM masks the span when the candidate has no audio") {
  QuilterCase f;
  const auto lm = MockPredictor::parse("apostle\tmissionary:-0.2\n");
  auto cfg = f.cfg();
  cfg.mask_value = -9.0f;
  const auto r = augment_utterance(f.utt, f.align, f.dict, &lm, cfg, 0);

  const auto& rep = r.trace.replacements[4];
  CHECK(rep.position == 4);
  CHECK(rep.action == ReplacementAction::Masked);
  CHECK(rep.new_token == "missionary");
  CHECK_FALSE(rep.segment_id.has_value());
  CHECK(r.utterance.transcript[4] == "missionary");
  CHECK(r.spans[4] == TokenSpan{"missionary", 16, 20});
  for (std::size_t t = 0; t < r.utterance.features.n_frames(); ++t) {
    for (std::size_t d = 0; d < 3; ++d) {
      const float expect = (t >= 16 && t < 20) ? -9.0f : f.utt.features.at(t, d);
      REQUIRE(r.utterance.features.at(t, d) == expect);
    }
  }

  // With retry, a lower-ranked candidate that has audio wins.
  const auto lm2 = MockPredictor::parse("apostle\tmissionary:-0.2 president:-3\n");
  cfg.lm_argmax = true;
  cfg.lm_retry = true;
  const auto r2 = augment_utterance(f.utt, f.align, f.dict, &lm2, cfg, 0);
  CHECK(r2.trace.replacements[4].action == ReplacementAction::Spliced);
  CHECK(r2.utterance.transcript[4] == "president");
}

TEST_CASE("SpecAugment-only leaves the transcript alone") {
  QuilterCase f;
  auto cfg = f.cfg();
  cfg.mode = AugmentMode::SpecAugmentOnly;
  cfg.spec = SpecAugmentParams{};
  const auto r = augment_utterance(f.utt, f.align, f.dict, nullptr, cfg, 0);
  CHECK(r.utterance.transcript == f.utt.transcript);
  CHECK(r.trace.replacements.empty());
  CHECK(r.trace.spec_augment_masks.size() == 4);
}

TEST_CASE("LM-only changes words but not audio") {
  QuilterCase f;
  auto cfg = f.cfg();
  cfg.mode = AugmentMode::LanguageModelOnly;
  const auto r = augment_utterance(f.utt, f.align, f.dict, &f.lm, cfg, 0);
  CHECK(r.utterance.features == f.utt.features);
  CHECK(r.utterance.transcript[1] == "lay");
  CHECK(r.utterance.transcript[4] == "president");
  CHECK(r.trace.replacements[1].action == ReplacementAction::Unchanged);
  CHECK(r.trace.replacements[1].new_token == "lay");
}

TEST_CASE("dictionary-only keeps words and swaps audio") {
  const auto c = test::the_cat_the_dog();
  const auto d = build_dictionary(c.utterances, c.alignments);
  AugmentConfig cfg;
  cfg.mode = AugmentMode::AudioDictOnly;
  cfg.spec = no_spec();
  cfg.schedule.f_dict_tok = 1.0;
  const auto r = augment_utterance(c.utterances[0], c.alignments[0], d, nullptr, cfg, 0);
  CHECK(r.utterance.transcript == c.utterances[0].transcript);
  // "the" has another pool entry (from u2); "cat" only has its own.
  REQUIRE(r.trace.replacements.size() == 2);
  CHECK(r.trace.replacements[0].action == ReplacementAction::Spliced);
  CHECK(r.trace.replacements[0].segment_id == d.pool("the")[1].segment_id);
  CHECK(r.utterance.features.slice(0, 20) == c.utterances[1].features.slice(5, 25));
  CHECK(r.utterance.features.n_frames() == 72 - 30 + 20);
}

TEST_CASE("ADA-RT draws a different dictionary word with its audio") {
  const auto c = test::the_cat_the_dog();
  const auto d = build_dictionary(c.utterances, c.alignments);
  AugmentConfig cfg;
  cfg.spec = no_spec();
  cfg.schedule.f_aligned_tok = 1.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.base_seed = seed;
    const auto r = augment_utterance(c.utterances[1], c.alignments[1], d, nullptr, cfg, 0);
    for (const auto& rep : r.trace.replacements) {
      REQUIRE(rep.action == ReplacementAction::Spliced);
      REQUIRE(rep.new_token != rep.original_token);
      REQUIRE(d.contains(rep.new_token));
      const auto pool = d.pool(rep.new_token);
      REQUIRE(std::any_of(pool.begin(), pool.end(), [&](const SegmentEntry& e) { return e.segment_id == *rep.segment_id; }));
    }
    REQUIRE(r.spans.size() == 2);
    REQUIRE(r.utterance.transcript == std::vector<std::string>{r.spans[0].token, r.spans[1].token});
  }
}

TEST_CASE("invariants hold for every mode on random corpora") {
  test::CorpusShape shape;
  shape.n_utterances = 60;
  shape.vocab = 20;
  shape.dims = 6;
  const auto c = test::make_corpus(shape, 123);
  const auto d = build_dictionary(c.utterances, c.alignments);
  std::string table;
  for (std::size_t i = 0; i < shape.vocab; ++i) {
    table += "w" + std::to_string(i) + "\tw" + std::to_string((i + 1) % shape.vocab) + ":-0.5 novel" +
             std::to_string(i) + ":-1.0 w" + std::to_string((i + 7) % shape.vocab) + ":-2\n";
  }
  const auto lm = MockPredictor::parse(table);

  for (auto mode : {AugmentMode::SpecAugmentOnly, AugmentMode::LanguageModelOnly, AugmentMode::AudioDictOnly,
                    AugmentMode::AdaLM, AugmentMode::AdaRT}) {
    CAPTURE(to_string(mode));
    AugmentConfig cfg;
    cfg.mode = mode;
    cfg.base_seed = 5;
    for (std::size_t i = 0; i < c.utterances.size(); ++i) {
      const auto& u = c.utterances[i];
      const auto r = augment_utterance(u, c.alignments[i], d, &lm, cfg, 1);
      const auto& t = r.trace;
      REQUIRE(t.utt_id == u.utt_id);
      REQUIRE(t.n_frames_before == u.features.n_frames());
      REQUIRE(t.n_frames_after == r.utterance.features.n_frames());
      REQUIRE(r.utterance.features.n_dims() == u.features.n_dims());
      REQUIRE(r.utterance.features.all_finite());
      REQUIRE(spans_consistent(r.spans, r.utterance.features.n_frames()));
      REQUIRE(r.spans.size() == r.utterance.transcript.size());
      for (std::size_t k = 0; k < r.spans.size(); ++k) REQUIRE(r.spans[k].token == r.utterance.transcript[k]);
      for (std::size_t k = 1; k < t.replacements.size(); ++k) {
        REQUIRE(t.replacements[k - 1].position < t.replacements[k].position);
      }
      const double f = mode == AugmentMode::AudioDictOnly ? cfg.schedule.f_dict_tok : cfg.schedule.f_aligned_tok;
      REQUIRE(t.replacements.size() == (mode == AugmentMode::SpecAugmentOnly ? 0 : n_replacements(u.transcript.size(), f)));
      std::size_t delta_frames = u.features.n_frames();
      for (const auto& rep : t.replacements) {
        REQUIRE(r.utterance.transcript[rep.position] == rep.new_token);
        REQUIRE(rep.segment_id.has_value() == (rep.action == ReplacementAction::Spliced));
        if (rep.action == ReplacementAction::Spliced) {
          delta_frames = delta_frames - c.alignments[i].spans[rep.position].width() + r.spans[rep.position].width();
        }
      }
      REQUIRE(delta_frames == r.utterance.features.n_frames());
      // Positions not replaced keep their token.
      std::set<std::size_t> touched;
      for (const auto& rep : t.replacements) touched.insert(rep.position);
      for (std::size_t k = 0; k < u.transcript.size(); ++k) {
        if (!touched.contains(k)) REQUIRE(r.utterance.transcript[k] == u.transcript[k]);
      }
    }
  }
}

TEST_CASE("same inputs, same result; new epoch, new result") {
  test::CorpusShape shape;
  shape.n_utterances = 100;
  shape.dims = 4;
  const auto c = test::make_corpus(shape, 8);
  const auto d = build_dictionary(c.utterances, c.alignments);
  AugmentConfig cfg;
  cfg.base_seed = 7;
  std::size_t differing = 0;
  for (std::size_t i = 0; i < c.utterances.size(); ++i) {
    const auto a = augment_scheduled(c.utterances[i], &c.alignments[i], d, nullptr, cfg, 0);
    const auto b = augment_scheduled(c.utterances[i], &c.alignments[i], d, nullptr, cfg, 0);
    REQUIRE(a.trace == b.trace);
    REQUIRE(a.utterance.features == b.utterance.features);
    const auto e1 = augment_scheduled(c.utterances[i], &c.alignments[i], d, nullptr, cfg, 1);
    differing += !(e1.trace.spec_augment_masks == a.trace.spec_augment_masks && e1.trace.replacements == a.trace.replacements);
  }
  CHECK(differing > 0);
  CHECK(differing >= 90);
}

TEST_CASE("over-length results fall back to the original utterance") {
  QuilterCase f;
  auto cfg = f.cfg();
  cfg.max_frames = f.utt.features.n_frames() + 1;  // two 2-frame growths exceed it
  const auto r = augment_utterance(f.utt, f.align, f.dict, &f.lm, cfg, 0);
  CHECK(r.utterance.features == f.utt.features);
  CHECK(r.utterance.transcript == f.utt.transcript);
  CHECK(r.trace.replacements.empty());
  CHECK(r.trace.note.starts_with("over_length_fallback"));
}

TEST_CASE("scheduled augmentation passes unusable alignments through") {
  QuilterCase f;
  AugmentConfig cfg;
  cfg.schedule = MixtureSchedule{1.0, 0.2, 0.0, 0.2};
  cfg.base_seed = 1;

  const auto none = augment_scheduled(f.utt, nullptr, f.dict, nullptr, cfg, 0);
  CHECK(none.trace.mode_assigned == AugmentMode::SpecAugmentOnly);
  CHECK(none.trace.note == "no_alignment_passthrough");
  CHECK(none.utterance.transcript == f.utt.transcript);

  auto wrong = f.align;
  wrong.spans[2].token = "was";
  const auto mismatch = augment_scheduled(f.utt, &wrong, f.dict, nullptr, cfg, 0);
  CHECK(mismatch.trace.note == "alignment_transcript_mismatch_passthrough");

  auto broken = f.align;
  broken.spans[3].start_frame = 2;
  CHECK(augment_scheduled(f.utt, &broken, f.dict, nullptr, cfg, 0).trace.note == "invalid_alignment_passthrough");

  CHECK(code_of([&] { augment_utterance(f.utt, wrong, f.dict, nullptr, cfg, 0); }) == Errc::SpanOutOfRange);

  const auto ok = augment_scheduled(f.utt, &f.align, f.dict, nullptr, cfg, 0);
  CHECK(ok.trace.mode_assigned == AugmentMode::AdaRT);
  CHECK(ok.trace.note.empty());
}

TEST_CASE("scheduled ablations use only the aligned share") {
  test::CorpusShape shape;
  shape.n_utterances = 2000;
  shape.dims = 2;
  shape.max_tokens = 8;
  const auto c = test::make_corpus(shape, 31);
  const auto d = build_dictionary(c.utterances, c.alignments);
  for (auto mode : {AugmentMode::AdaRT, AugmentMode::AudioDictOnly}) {
    AugmentConfig cfg;
    cfg.mode = mode;
    cfg.spec = no_spec();
    std::map<AugmentMode, std::size_t> counts;
    for (std::size_t i = 0; i < c.utterances.size(); ++i) {
      ++counts[augment_scheduled(c.utterances[i], &c.alignments[i], d, nullptr, cfg, 0).trace.mode_assigned];
    }
    const double n = static_cast<double>(c.utterances.size());
    auto near = [n](std::size_t k, double p) {
      return std::abs(static_cast<double>(k) / n - p) <= 5 * std::sqrt(p * (1 - p) / n);
    };
    if (mode == AugmentMode::AdaRT) {
      CHECK(near(counts[AugmentMode::AdaRT], 0.50));
      CHECK(near(counts[AugmentMode::AudioDictOnly], 0.15));
      CHECK(near(counts[AugmentMode::SpecAugmentOnly], 0.35));
    } else {
      CHECK(near(counts[AugmentMode::AudioDictOnly], 0.50));
      CHECK(near(counts[AugmentMode::SpecAugmentOnly], 0.50));
    }
  }
}

// ---------------------------------------------------------------------------
// Stream, ADAB, trace

namespace {

std::string run_stream(const test::SyntheticCorpus& c, const AudioDictionary& d, std::size_t workers,
                       std::string* traces) {
  MemorySource source(c.utterances);
  AugmentConfig cfg;
  cfg.base_seed = 7;
  AugmentStream stream(source, c.alignments, d, nullptr, cfg, 0, workers);
  std::ostringstream out;
  while (auto r = stream.next()) {
    write_adab_record(out, r->utterance);
    *traces += format_trace(r->trace) + "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("stream output does not depend on the worker count") {
  test::CorpusShape shape;
  shape.n_utterances = 300;
  shape.dims = 8;
  const auto c = test::make_corpus(shape, 55);
  const auto d = build_dictionary(c.utterances, c.alignments);
  std::string t1, t8, t3;
  const auto s1 = run_stream(c, d, 1, &t1);
  const auto s8 = run_stream(c, d, 8, &t8);
  const auto s3 = run_stream(c, d, 3, &t3);
  CHECK(s1 == s8);
  CHECK(t1 == t8);
  CHECK(s1 == s3);
  CHECK(std::count(t1.begin(), t1.end(), '\n') == 300);
}

TEST_CASE("stream yields corpus order and matches single-utterance calls") {
  const auto c = test::make_corpus(test::CorpusShape{40}, 2);
  const auto d = build_dictionary(c.utterances, c.alignments);
  MemorySource source(c.utterances);
  AugmentConfig cfg;
  AugmentStream stream(source, c.alignments, d, nullptr, cfg, 4, 4);
  std::size_t i = 0;
  while (auto r = stream.next()) {
    REQUIRE(r->utterance.utt_id == c.utterances[i].utt_id);
    const auto direct = augment_scheduled(c.utterances[i], &c.alignments[i], d, nullptr, cfg, 4);
    REQUIRE(direct.trace == r->trace);
    ++i;
  }
  CHECK(i == 40);
}

TEST_CASE("stream rethrows predictor failures") {
  struct Failing final : Predictor {
    std::vector<CandidateSet> predict(std::span<const std::string>, std::span<const std::size_t>,
                                      std::size_t) const override {
      throw Error(Errc::ServerUnreachable, "down");
    }
  } failing;
  const auto c = test::make_corpus(test::CorpusShape{20}, 3);
  const auto d = build_dictionary(c.utterances, c.alignments);
  MemorySource source(c.utterances);
  AugmentConfig cfg;
  cfg.mode = AugmentMode::AdaLM;
  AugmentStream stream(source, c.alignments, d, &failing, cfg, 0, 2);
  CHECK(code_of([&] { while (stream.next()) {} }) == Errc::ServerUnreachable);
}

TEST_CASE("ADAB records round trip") {
  Rng rng(6);
  std::stringstream buf;
  std::vector<Utterance> written;
  for (int i = 0; i < 10; ++i) {
    written.push_back({"utt-" + std::to_string(i), test::random_matrix(rng.index(20), 3, rng),
                       {"a", "b" + std::to_string(i)}});
    write_adab_record(buf, written.back());
  }
  for (const auto& u : written) {
    const auto r = read_adab_record(buf);
    REQUIRE(r.has_value());
    CHECK(r->utt_id == u.utt_id);
    CHECK(r->transcript == u.transcript);
    CHECK(r->features == u.features);
  }
  CHECK_FALSE(read_adab_record(buf).has_value());

  std::stringstream one;
  write_adab_record(one, written[3]);
  std::string bytes = one.str();
  std::istringstream cut(bytes.substr(0, bytes.size() - 2));
  CHECK(code_of([&] { read_adab_record(cut); }) == Errc::TruncatedFile);
}

TEST_CASE("ADAB byte layout") {
  std::ostringstream out;
  write_adab_record(out, Utterance{"u", FeatureMatrix(1, 1, std::vector<float>{2.0f}), {"hi", "there"}});
  const std::string expected = std::string("\x01\x00", 2) + "u" + std::string("\x08\x00\x00\x00", 4) + "hi there" +
                               std::string("\x01\x00\x00\x00\x01\x00\x00\x00", 8) + std::string("\x00\x00\x00\x40", 4);
  CHECK(out.str() == expected);
}

TEST_CASE("trace JSON") {
  AugmentTrace t;
  t.utt_id = "u1";
  t.epoch = 2;
  t.mode_assigned = AugmentMode::AdaLM;
  t.replacements = {{1, "quilter", "lay", ReplacementAction::Spliced, 7},
                    {4, "apostle", "missionary", ReplacementAction::Masked, std::nullopt}};
  t.n_frames_before = 10;
  t.n_frames_after = 12;
  t.spec_augment_masks = {{MaskAxis::Frequency, 3, 5}, {MaskAxis::Time, 0, 2}};
  const auto line = format_trace(t);
  CHECK(line.find('\n') == std::string::npos);
  const auto j = nlohmann::json::parse(line);
  CHECK(j["utt_id"] == "u1");
  CHECK(j["epoch"] == 2);
  CHECK(j["mode_assigned"] == "ada-lm");
  CHECK(j["n_frames_before"] == 10);
  CHECK(j["n_frames_after"] == 12);
  CHECK(j["replacements"][0]["action"] == "SPLICED");
  CHECK(j["replacements"][0]["segment_id"] == 7);
  CHECK(j["replacements"][1]["action"] == "MASKED");
  CHECK_FALSE(j["replacements"][1].contains("segment_id"));
  CHECK(j["spec_augment_masks"][0]["axis"] == "freq");
  CHECK(j["spec_augment_masks"][1]["axis"] == "time");
  CHECK_FALSE(j.contains("note"));
}

TEST_CASE("mode names") {
  for (auto m : {AugmentMode::SpecAugmentOnly, AugmentMode::LanguageModelOnly, AugmentMode::AudioDictOnly,
                 AugmentMode::AdaLM, AugmentMode::AdaRT}) {
    CHECK(parse_augment_mode(to_string(m)) == m);
  }
  CHECK(code_of([] { parse_augment_mode("ada"); }) == Errc::InvalidArgument);
}

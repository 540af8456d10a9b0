#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "ada/alignment.hpp"
#include "ada/audiodict.hpp"
#include "ada/augment.hpp"
#include "ada/candidates.hpp"
#include "ada/error.hpp"
#include "ada/eval.hpp"
#include "ada/features.hpp"
#include "ada/schedule.hpp"

namespace py = pybind11;
using namespace ada;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using SpanTuple = std::tuple<std::string, std::size_t, std::size_t>;

FeatureMatrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw Error(Errc::InvalidArgument, "features must be a 2-D (frames, dims) array");
  const auto frames = static_cast<std::size_t>(a.shape(0)), dims = static_cast<std::size_t>(a.shape(1));
  std::vector<float> data(a.data(), a.data() + frames * dims);
  return FeatureMatrix(frames, dims, std::move(data));
}

Array to_array(const FeatureMatrix& m) {
  Array out({m.n_frames(), m.n_dims()});
  if (!m.data().empty()) std::memcpy(out.mutable_data(), m.data().data(), m.data().size_bytes());
  return out;
}

std::vector<SpanTuple> to_tuples(const std::vector<TokenSpan>& spans) {
  std::vector<SpanTuple> out;
  for (const auto& s : spans) out.emplace_back(s.token, s.start_frame, s.end_frame);
  return out;
}

std::vector<TokenSpan> to_spans(const std::vector<SpanTuple>& spans) {
  std::vector<TokenSpan> out;
  for (const auto& [tok, b, e] : spans) out.push_back({tok, b, e});
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::vector<SpanTuple>> ctm_dict(const std::vector<AlignedUtterance>& all) {
  std::map<std::string, std::vector<SpanTuple>> out;
  for (const auto& a : all) out[a.utt_id] = to_tuples(a.spans);
  return out;
}

py::list mask_list(const std::vector<MaskRect>& rects) {
  py::list out;
  for (const auto& r : rects) {
    out.append(py::make_tuple(r.axis == MaskAxis::Frequency ? "freq" : "time", r.start, r.width));
  }
  return out;
}

py::dict result_dict(const AugmentResult& r) {
  py::dict d;
  d["utt_id"] = r.utterance.utt_id;
  d["features"] = to_array(r.utterance.features);
  d["transcript"] = r.utterance.transcript;
  d["spans"] = to_tuples(r.spans);
  d["trace"] = format_trace(r.trace);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Token-level audio data augmentation core";

  // Leaked on purpose: these must outlive module teardown.
  static PyObject* ada_error = (new py::exception<Error>(m, "AdaError", PyExc_ValueError))->ptr();
  static PyObject* dependency_error = (new py::exception<Error>(m, "DependencyError", ada_error))->ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyObject* type = e.is_dependency_failure() ? dependency_error : ada_error;
      py::object exc = py::reinterpret_borrow<py::object>(type)(e.what());
      exc.attr("code") = std::string(errc_name(e.code()));
      PyErr_SetObject(type, exc.ptr());
    }
  });

  // features
  m.def("read_features", [](const std::filesystem::path& p) { return to_array(read_features(p)); }, py::arg("path"));
  m.def(
      "write_features", [](const Array& a, const std::filesystem::path& p) { write_features(to_matrix(a), p); },
      py::arg("features"), py::arg("path"));
  m.def("tokenize", [](const std::string& text) { return tokenize_transcript(text); }, py::arg("text"));
  m.def(
      "extract_fbank",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> samples, int sample_rate, std::size_t n_mels) {
        FbankConfig cfg;
        cfg.n_mels = n_mels;
        const std::span<const float> s(samples.data(), static_cast<std::size_t>(samples.size()));
        return to_array(extract_fbank(s, sample_rate, cfg));
      },
      py::arg("samples"), py::arg("sample_rate") = 16000, py::arg("n_mels") = 80);

  // alignment
  m.def("parse_ctm", [](const std::string& text) { return ctm_dict(parse_ctm(text)); }, py::arg("text"));
  m.def(
      "read_ctm", [](const std::filesystem::path& p) { return ctm_dict(parse_ctm(slurp(p))); }, py::arg("path"));

  // dictionary
  py::class_<AudioDictionary>(m, "AudioDictionary")
      .def_static(
          "build",
          [](const std::filesystem::path& manifest, const std::filesystem::path& ctm, std::size_t max_pool,
             std::size_t min_frames, std::uint64_t seed) {
            py::gil_scoped_release release;
            return build_dictionary(read_manifest(manifest), parse_ctm(slurp(ctm)),
                                    BuildOptions{max_pool, min_frames, seed});
          },
          py::arg("manifest"), py::arg("ctm"), py::arg("max_pool") = 0, py::arg("min_frames") = 1,
          py::arg("seed") = 0)
      .def_static("load", [](const std::filesystem::path& p) { return load(p); }, py::arg("path"))
      .def("save", [](const AudioDictionary& d, const std::filesystem::path& p) { save(d, p); }, py::arg("path"))
      .def_property_readonly("n_dims", &AudioDictionary::n_dims)
      .def_property_readonly("n_keys", &AudioDictionary::n_keys)
      .def("keys", &AudioDictionary::keys)
      .def("__contains__", [](const AudioDictionary& d, const std::string& t) { return d.contains(t); })
      .def("__len__", &AudioDictionary::n_keys)
      .def(
          "pool",
          [](const AudioDictionary& d, const std::string& token) {
            py::list out;
            for (const auto& s : d.pool(token)) {
              out.append(py::make_tuple(s.segment_id, s.source_utt_id, s.start_frame, s.end_frame, to_array(s.data)));
            }
            return out;
          },
          py::arg("token"))
      .def("stats", [](const AudioDictionary& d) {
        const auto s = stats(d);
        py::dict out;
        out["n_keys"] = s.n_keys;
        out["n_segments"] = s.n_segments;
        out["total_frames"] = s.total_frames;
        out["pool_size_histogram"] = s.pool_size_histogram;
        return out;
      });

  // language model clients
  py::class_<Predictor, std::shared_ptr<Predictor>>(m, "Predictor")
      .def(
          "predict",
          [](const Predictor& p, const std::vector<std::string>& tokens, const std::vector<std::size_t>& positions,
             std::size_t top_k) {
            std::vector<CandidateSet> sets;
            {
              py::gil_scoped_release release;
              sets = p.predict(tokens, positions, top_k);
            }
            std::vector<std::vector<std::pair<std::string, double>>> out;
            for (const auto& cs : sets) {
              auto& row = out.emplace_back();
              for (const auto& c : cs.candidates) row.emplace_back(c.token, c.logprob);
            }
            return out;
          },
          py::arg("tokens"), py::arg("positions"), py::arg("top_k") = 5);
  py::class_<MockPredictor, Predictor, std::shared_ptr<MockPredictor>>(m, "MockPredictor")
      .def(py::init([](const std::string& tsv) { return std::make_shared<MockPredictor>(MockPredictor::parse(tsv)); }),
           py::arg("table_tsv"))
      .def_static(
          "from_file",
          [](const std::filesystem::path& p) { return std::make_shared<MockPredictor>(MockPredictor::from_file(p)); },
          py::arg("path"));
  py::class_<HttpPredictor, Predictor, std::shared_ptr<HttpPredictor>>(m, "HttpPredictor")
      .def(py::init([](const std::string& endpoint, double timeout_s) {
             return std::make_shared<HttpPredictor>(
                 endpoint, std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000)));
           }),
           py::arg("endpoint"), py::arg("timeout") = 10.0)
      .def_property_readonly("endpoint", &HttpPredictor::endpoint);

  // augmentation
  m.def(
      "spec_augment",
      [](const Array& a, std::uint64_t seed, std::size_t freq_mask_param, std::size_t n_freq_masks,
         std::size_t time_mask_param, std::size_t n_time_masks, float mask_value) {
        Rng rng(seed);
        std::vector<MaskRect> rects;
        const auto out = spec_augment(to_matrix(a), {freq_mask_param, n_freq_masks, time_mask_param, n_time_masks},
                                      mask_value, rng, &rects);
        return py::make_tuple(to_array(out), mask_list(rects));
      },
      py::arg("features"), py::arg("seed"), py::arg("freq_mask_param") = 30, py::arg("n_freq_masks") = 2,
      py::arg("time_mask_param") = 40, py::arg("n_time_masks") = 2, py::arg("mask_value") = 0.0f);

  m.def(
      "splice",
      [](const Array& a, const std::vector<SpanTuple>& spans, std::size_t position, const Array& segment) {
        const auto seg = to_matrix(segment);
        Utterance u{"", to_matrix(a), {}};
        const auto r = splice(u, to_spans(spans), position, SegmentEntry{0, "", 0, seg.n_frames(), seg});
        return py::make_tuple(to_array(r.utterance.features), to_tuples(r.spans));
      },
      py::arg("features"), py::arg("spans"), py::arg("position"), py::arg("segment"));

  m.def(
      "augment",
      [](const std::string& utt_id, const Array& a, const std::vector<std::string>& transcript,
         const std::optional<std::vector<SpanTuple>>& spans, const AudioDictionary& dict, const std::string& mode,
         std::uint64_t seed, std::uint64_t epoch, std::shared_ptr<Predictor> lm, bool scheduled,
         const std::string& schedule, float mask_value) {
        AugmentConfig cfg;
        cfg.mode = parse_augment_mode(mode);
        cfg.base_seed = seed;
        cfg.schedule = schedule_preset(schedule);
        cfg.mask_value = mask_value;
        const Utterance u{utt_id, to_matrix(a), transcript};
        std::optional<AlignedUtterance> al;
        if (spans) al = validate(AlignedUtterance{utt_id, to_spans(*spans)}, u.features.n_frames());
        AugmentResult r;
        {
          py::gil_scoped_release release;
          if (scheduled) {
            r = augment_scheduled(u, al ? &*al : nullptr, dict, lm.get(), cfg, epoch);
          } else {
            if (!al) throw Error(Errc::InvalidArgument, "a fixed-mode augment needs spans");
            r = augment_utterance(u, *al, dict, lm.get(), cfg, epoch);
          }
        }
        return result_dict(r);
      },
      py::arg("utt_id"), py::arg("features"), py::arg("transcript"), py::arg("spans"), py::arg("dictionary"),
      py::arg("mode") = "ada-rt", py::arg("seed") = 0, py::arg("epoch") = 0, py::arg("lm") = nullptr,
      py::arg("scheduled") = true, py::arg("schedule") = "libri100", py::arg("mask_value") = 0.0f);

  m.def(
      "augment_corpus",
      [](const std::filesystem::path& manifest_path, const std::filesystem::path& ctm_path,
         const AudioDictionary& dict, const std::string& mode, std::uint64_t seed, std::uint64_t epoch,
         std::shared_ptr<Predictor> lm, std::size_t workers, const std::string& schedule) {
        AugmentConfig cfg;
        cfg.mode = parse_augment_mode(mode);
        cfg.base_seed = seed;
        cfg.schedule = schedule_preset(schedule);
        const auto manifest = read_manifest(manifest_path);
        std::vector<AugmentResult> results;
        {
          py::gil_scoped_release release;
          std::unordered_map<std::string, std::size_t> frames;
          for (const auto& e : manifest.entries) frames[e.utt_id] = read_feature_header(e.feature_path).n_frames;
          std::vector<AlignedUtterance> alignments;
          for (const auto& a : parse_ctm(slurp(ctm_path))) {
            const auto it = frames.find(a.utt_id);
            if (it == frames.end()) throw Error(Errc::UnknownUtterance, a.utt_id + " is not in the manifest");
            alignments.push_back(validate(a, it->second));
          }
          const ManifestSource source(manifest);
          AugmentStream stream(source, alignments, dict, lm.get(), cfg, epoch, workers);
          while (auto r = stream.next()) results.push_back(std::move(*r));
        }
        py::list out;
        for (const auto& r : results) out.append(result_dict(r));
        return out;
      },
      py::arg("manifest"), py::arg("ctm"), py::arg("dictionary"), py::arg("mode") = "ada-rt", py::arg("seed") = 0,
      py::arg("epoch") = 0, py::arg("lm") = nullptr, py::arg("workers") = 1, py::arg("schedule") = "libri100");

  m.def("n_replacements", &n_replacements, py::arg("n_tokens"), py::arg("fraction"));
  m.def(
      "schedule_preset",
      [](const std::string& name) {
        const auto s = schedule_preset(name);
        return py::make_tuple(s.p_aligned_sent, s.f_aligned_tok, s.p_dict_sent, s.f_dict_tok);
      },
      py::arg("name"));

  // evaluation
  m.def(
      "wer_counts",
      [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
        const auto c = wer_counts(ref, hyp);
        py::dict d;
        d["substitutions"] = c.substitutions;
        d["deletions"] = c.deletions;
        d["insertions"] = c.insertions;
        d["ref_len"] = c.ref_len;
        return d;
      },
      py::arg("ref"), py::arg("hyp"));
  m.def(
      "corpus_wer",
      [](const std::vector<RefHypPair>& pairs) { return corpus_wer(pairs); }, py::arg("pairs"));
  m.def(
      "randomization_test",
      [](const std::vector<double>& a, const std::vector<double>& b, const std::vector<std::size_t>& ref_lens,
         std::size_t n_shuffles, double swap_probability, std::uint64_t seed) {
        SigTestConfig cfg;
        cfg.n_shuffles = n_shuffles;
        cfg.swap_probability = swap_probability;
        Rng rng(seed);
        const auto r = randomization_test(a, b, ref_lens, cfg, rng);
        py::dict d;
        d["p_value"] = r.p_value;
        d["observed"] = r.observed;
        d["exact"] = r.exact;
        d["n_trials"] = r.n_trials;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("ref_lens"), py::arg("n_shuffles") = 1000,
      py::arg("swap_probability") = 0.5, py::arg("seed") = 0);
  m.def("bonferroni", &bonferroni, py::arg("alpha"), py::arg("n_comparisons"));
}

#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "ada/alignment.hpp"
#include "ada/audiodict.hpp"
#include "ada/augment.hpp"
#include "ada/candidates.hpp"
#include "ada/error.hpp"
#include "ada/eval.hpp"
#include "ada/features.hpp"
#include "ada/schedule.hpp"

namespace ada::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<AlignedUtterance> read_ctm(const fs::path& path) { return parse_ctm(slurp(path)); }

json stats_json(const DictStats& s) {
  json hist = json::object();
  for (const auto& [size, count] : s.pool_size_histogram) hist[std::to_string(size)] = count;
  return {{"n_keys", s.n_keys},
          {"n_segments", s.n_segments},
          {"total_frames", s.total_frames},
          {"pool_size_histogram", hist}};
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// Shared augmentation flags (augment and bench)

struct AugmentFlags {
  std::string manifest;
  std::string ctm;
  std::string dict;
  std::string schedule = "libri100";
  MixtureSchedule custom{};
  AugmentConfig cfg;
  std::string lm_endpoint;
  std::string lm_mock;
  int lm_timeout_ms = 10000;
  bool mask_mean = false;
  bool no_exclude_own = false;
};

void add_augment_flags(CLI::App* cmd, AugmentFlags& f) {
  cmd->add_option("--manifest", f.manifest, "Corpus manifest TSV")->required();
  cmd->add_option("--ctm", f.ctm, "Word alignments in CTM format")->required();
  cmd->add_option("--dict", f.dict, "Audio dictionary (ADAD)")->required();
  cmd->add_option("--schedule", f.schedule, "Mixture schedule")
      ->check(CLI::IsMember({"libri100", "libri960", "custom"}))
      ->capture_default_str();
  cmd->add_option("--p-aligned-sent", f.custom.p_aligned_sent, "custom: aligned sentence share");
  cmd->add_option("--f-aligned-tok", f.custom.f_aligned_tok, "custom: aligned token share");
  cmd->add_option("--p-dict-sent", f.custom.p_dict_sent, "custom: dict-only sentence share");
  cmd->add_option("--f-dict-tok", f.custom.f_dict_tok, "custom: dict-only token share");
  cmd->add_option("--seed", f.cfg.base_seed, "Base seed")->capture_default_str();
  cmd->add_option("--lm-endpoint", f.lm_endpoint, "LM server base URL")->envname("ADA_LM_ENDPOINT");
  cmd->add_option("--lm-mock", f.lm_mock, "Mock predictor table (TSV) instead of an LM server");
  cmd->add_option("--lm-timeout-ms", f.lm_timeout_ms, "LM request timeout")->capture_default_str();
  cmd->add_option("--lm-top-k", f.cfg.lm_top_k, "Candidates requested per position")->capture_default_str();
  cmd->add_option("--lm-temperature", f.cfg.lm_temperature, "Softmax temperature for candidate sampling")
      ->capture_default_str();
  cmd->add_flag("--lm-argmax", f.cfg.lm_argmax, "Always take the top LM candidate");
  cmd->add_flag("--lm-retry", f.cfg.lm_retry,
                "Fall back to lower-ranked candidates present in the dictionary before masking");
  cmd->add_option("--freq-mask-param", f.cfg.spec.freq_mask_param, "SpecAugment F")->capture_default_str();
  cmd->add_option("--n-freq-masks", f.cfg.spec.n_freq_masks, "SpecAugment frequency masks")
      ->capture_default_str();
  cmd->add_option("--time-mask-param", f.cfg.spec.time_mask_param, "SpecAugment T")->capture_default_str();
  cmd->add_option("--n-time-masks", f.cfg.spec.n_time_masks, "SpecAugment time masks")->capture_default_str();
  cmd->add_option("--mask-value", f.cfg.mask_value, "Fill value for masks")->capture_default_str();
  cmd->add_flag("--mask-mean", f.mask_mean, "Fill masks with the utterance mean instead");
  cmd->add_option("--max-frames", f.cfg.max_frames, "Longer augmented utterances fall back to the original")
      ->capture_default_str();
  cmd->add_flag("--no-exclude-own", f.no_exclude_own,
                "Allow sampling the segment cut from the replaced span itself");
}

void finalize(AugmentFlags& f) {
  f.cfg.schedule = f.schedule == "custom" ? f.custom : schedule_preset(f.schedule);
  f.cfg.mask_value_mode = f.mask_mean ? MaskValueMode::UtteranceMean : MaskValueMode::Constant;
  f.cfg.exclude_own_segment = !f.no_exclude_own;
  f.cfg.check();
}

std::unique_ptr<Predictor> make_predictor(const AugmentFlags& f, AugmentMode mode) {
  const bool needs_lm = mode == AugmentMode::AdaLM || mode == AugmentMode::LanguageModelOnly;
  if (!f.lm_mock.empty()) return std::make_unique<MockPredictor>(MockPredictor::from_file(f.lm_mock));
  if (!f.lm_endpoint.empty()) {
    return std::make_unique<HttpPredictor>(f.lm_endpoint, std::chrono::milliseconds(f.lm_timeout_ms));
  }
  if (needs_lm) {
    throw Error(Errc::InvalidArgument, std::string(to_string(mode)) +
                                           " needs --lm-endpoint, ADA_LM_ENDPOINT or --lm-mock");
  }
  return nullptr;
}

struct Inputs {
  CorpusManifest manifest;
  std::vector<AlignedUtterance> alignments;
  AudioDictionary dict;
};

Inputs load_inputs(const AugmentFlags& f) {
  return {read_manifest(f.manifest), read_ctm(f.ctm), load(f.dict)};
}

std::string safe_file_name(std::string id) {
  for (auto& c : id) {
    if (c == '/' || c == '\\') c = '_';
  }
  return id;
}

// ---------------------------------------------------------------------------

int cmd_build_dict(const std::string& manifest_path, const std::string& ctm_path,
                   const std::string& out, const BuildOptions& opts) {
  const auto manifest = read_manifest(manifest_path);
  const auto alignments = read_ctm(ctm_path);
  const auto dict = build_dictionary(manifest, alignments, opts);
  save(dict, out);
  emit(stats_json(stats(dict)));
  return kExitOk;
}

int cmd_augment(AugmentFlags& f, const std::string& mode_name, std::uint64_t epoch,
                const std::string& out_dir, bool stream, const std::string& trace_path,
                std::size_t workers) {
  f.cfg.mode = parse_augment_mode(mode_name);
  finalize(f);
  if (stream == !out_dir.empty()) {
    throw Error(Errc::InvalidArgument, "give exactly one of --out-dir or --stream");
  }
  const auto predictor = make_predictor(f, f.cfg.mode);
  const auto in = load_inputs(f);

  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path, std::ios::binary | std::ios::trunc);
    if (!trace) throw Error(Errc::IoFailure, "cannot create " + trace_path);
  }
  CorpusManifest out_manifest;
  if (!out_dir.empty()) fs::create_directories(out_dir);

  ManifestSource source(in.manifest);
  AugmentStream augmenter(source, in.alignments, in.dict, predictor.get(), f.cfg, epoch, workers);
  std::size_t count = 0;
  while (auto r = augmenter.next()) {
    if (stream) {
      write_adab_record(std::cout, r->utterance);
    } else {
      const fs::path file = safe_file_name(r->utterance.utt_id) + ".adaf";
      write_features(r->utterance.features, fs::path(out_dir) / file);
      out_manifest.entries.push_back({r->utterance.utt_id, file, r->utterance.transcript});
    }
    if (trace) trace << format_trace(r->trace) << '\n';
    ++count;
  }
  if (!out_dir.empty()) write_manifest(out_manifest, fs::path(out_dir) / "manifest.tsv");
  if (stream) std::cout.flush();
  std::cerr << "augmented " << count << " utterances (mode " << mode_name << ", epoch " << epoch << ")\n";
  return kExitOk;
}

int cmd_inspect_dict(const std::string& path, const std::string& token) {
  const auto dict = load(path);
  json j = stats_json(stats(dict));
  j["n_dims"] = dict.n_dims();
  if (!token.empty()) {
    json pool = json::array();
    for (const auto& seg : dict.pool(token)) {
      pool.push_back({{"segment_id", seg.segment_id},
                      {"source_utt_id", seg.source_utt_id},
                      {"start_frame", seg.start_frame},
                      {"end_frame", seg.end_frame}});
    }
    j["token"] = token;
    j["pool"] = pool;
  }
  emit(j);
  return kExitOk;
}

int cmd_wer(const std::string& ref_path, const std::string& hyp_path, const std::string& scores_out) {
  const auto refs = read_transcripts(ref_path);
  std::unordered_map<std::string, std::vector<std::string>> hyps;
  for (auto& [id, toks] : read_transcripts(hyp_path)) hyps.emplace(std::move(id), std::move(toks));

  std::ofstream scores;
  if (!scores_out.empty()) {
    scores.open(scores_out, std::ios::binary | std::ios::trunc);
    if (!scores) throw Error(Errc::IoFailure, "cannot create " + scores_out);
  }
  WerCounts total;
  for (const auto& [id, ref] : refs) {
    auto it = hyps.find(id);
    if (it == hyps.end()) throw Error(Errc::UnknownUtterance, "no hypothesis for " + id);
    const auto c = wer_counts(ref, it->second);
    total += c;
    if (scores) scores << id << '\t' << c.ref_len << '\t' << c.errors() << '\n';
    hyps.erase(it);
  }
  if (!hyps.empty()) throw Error(Errc::UnknownUtterance, "hypothesis without reference: " + hyps.begin()->first);
  emit({{"substitutions", total.substitutions},
        {"deletions", total.deletions},
        {"insertions", total.insertions},
        {"errors", total.errors()},
        {"ref_len", total.ref_len},
        {"n_utterances", refs.size()},
        {"wer", total.wer()}});
  return kExitOk;
}

int cmd_sigtest(const std::string& a_path, const std::string& b_path, const SigTestConfig& cfg,
                std::uint64_t seed) {
  const auto a = read_scores(a_path);
  std::unordered_map<std::string, const ScoredExample*> b_by_id;
  const auto b = read_scores(b_path);
  for (const auto& e : b) b_by_id.emplace(e.utt_id, &e);
  if (a.size() != b.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " examples");
  }
  std::vector<double> avg_a, avg_b;
  std::vector<std::size_t> ref_lens;
  for (const auto& ea : a) {
    auto it = b_by_id.find(ea.utt_id);
    if (it == b_by_id.end()) throw Error(Errc::UnknownUtterance, ea.utt_id + " missing from " + b_path);
    if (it->second->ref_len != ea.ref_len) {
      throw Error(Errc::LengthMismatch, ea.utt_id + ": reference lengths differ");
    }
    avg_a.push_back(average_runs(ea));
    avg_b.push_back(average_runs(*it->second));
    ref_lens.push_back(ea.ref_len);
  }
  Rng rng(seed);
  const auto res = randomization_test(avg_a, avg_b, ref_lens, cfg, rng);
  const double corrected = bonferroni(cfg.alpha, cfg.n_comparisons);
  double sum_ref = 0, sum_a = 0, sum_b = 0;
  for (std::size_t i = 0; i < ref_lens.size(); ++i) {
    sum_ref += static_cast<double>(ref_lens[i]);
    sum_a += avg_a[i];
    sum_b += avg_b[i];
  }
  emit({{"n_examples", ref_lens.size()},
        {"wer_a", sum_a / sum_ref},
        {"wer_b", sum_b / sum_ref},
        {"observed_statistic", res.observed},
        {"p_value", res.p_value},
        {"exact", res.exact},
        {"n_trials", res.n_trials},
        {"alpha", cfg.alpha},
        {"n_comparisons", cfg.n_comparisons},
        {"alpha_corrected", corrected},
        {"significant", res.p_value < corrected}});
  return kExitOk;
}

int cmd_extract_fbank(const std::string& input, const std::string& out, int raw_rate, const FbankConfig& cfg) {
  int rate = 0;
  const auto samples = read_pcm16(input, rate, raw_rate);
  const auto feats = extract_fbank(samples, rate, cfg);
  write_features(feats, out);
  emit({{"n_samples", samples.size()}, {"n_frames", feats.n_frames()}, {"n_dims", feats.n_dims()}});
  return kExitOk;
}

int cmd_filter_corpus(const std::string& manifest_path, const std::string& out, std::size_t max_frames,
                      std::size_t max_units) {
  const auto manifest = read_manifest(manifest_path);
  auto kept = filter_corpus(manifest, max_frames, max_units);
  const fs::path out_dir = fs::absolute(out).parent_path();
  for (auto& e : kept.entries) e.feature_path = fs::proximate(fs::absolute(e.feature_path), out_dir);
  write_manifest(kept, out);
  emit({{"input", manifest.size()}, {"kept", kept.size()}, {"removed", manifest.size() - kept.size()}});
  return kExitOk;
}

int cmd_bench(AugmentFlags& f, const std::vector<std::string>& modes, std::size_t repeat) {
  finalize(f);
  if (repeat == 0) throw Error(Errc::InvalidArgument, "--repeat must be >= 1");
  const auto in = load_inputs(f);

  // Time augmentation only: features are loaded up front.
  std::vector<Utterance> corpus;
  corpus.reserve(in.manifest.size());
  for (const auto& e : in.manifest.entries) corpus.push_back(load_utterance(e));
  if (corpus.empty()) throw Error(Errc::InvalidArgument, "bench needs a non-empty corpus");
  std::unordered_map<std::string, const AlignedUtterance*> by_id;
  std::vector<AlignedUtterance> clamped;
  clamped.reserve(in.alignments.size());
  std::unordered_map<std::string, std::size_t> frames;
  for (const auto& u : corpus) frames[u.utt_id] = u.features.n_frames();
  for (const auto& a : in.alignments) {
    auto it = frames.find(a.utt_id);
    if (it != frames.end()) clamped.push_back(validate(a, it->second));
  }
  for (const auto& a : clamped) by_id.emplace(a.utt_id, &a);

  std::vector<std::string> order{"specaugment"};
  for (const auto& m : modes) {
    parse_augment_mode(m);
    if (m != "specaugment") order.push_back(m);
  }
  // Training-time ratios measured end to end on LibriSpeech 100h, for context.
  const std::map<std::string, double> reference{
      {"specaugment", 1.0}, {"lm-only", 2.0}, {"dict-only", 1.2}, {"ada-lm", 2.4}, {"ada-rt", 1.3}};

  json report;
  report["n_utterances"] = corpus.size();
  report["repeat"] = repeat;
  report["modes"] = json::array();
  double baseline = 0.0;
  for (const auto& name : order) {
    AugmentConfig cfg = f.cfg;
    cfg.mode = parse_augment_mode(name);
    const auto predictor = make_predictor(f, cfg.mode);
    std::vector<double> samples;
    for (std::size_t r = 0; r < repeat; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      for (const auto& u : corpus) {
        auto it = by_id.find(u.utt_id);
        augment_scheduled(u, it == by_id.end() ? nullptr : it->second, in.dict, predictor.get(), cfg, r);
      }
      const auto dt = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
      samples.push_back(dt.count() / static_cast<double>(corpus.size()));
    }
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    if (name == "specaugment") baseline = mean;
    report["modes"].push_back({{"mode", name},
                               {"samples_ms_per_utt", samples},
                               {"mean_ms_per_utt", mean},
                               {"ratio_to_specaugment", mean / baseline},
                               {"reference_end_to_end_ratio", reference.at(name)}});
  }
  emit(report);
  return kExitOk;
}

/// Splices `--config FILE` (flat key=value lines) into the argument list as
/// `--key=value` right after the subcommand name, so that flags given on the
/// command line come later and win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].starts_with("--config=")) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config.empty()) return args;

  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
    return s;
  };
  std::vector<std::string> injected;
  std::istringstream in(slurp(config));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::MalformedLine, config + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    while (key.starts_with("-")) key.erase(0, 1);
    injected.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  const auto sub = std::find_if(args.begin() + 1, args.end(), [](const std::string& a) { return !a.starts_with("-"); });
  const auto at = sub == args.end() ? args.end() : sub + 1;
  args.insert(at, injected.begin(), injected.end());
  return args;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Aligned data augmentation for speech recognition corpora"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_help_only;
  app.add_option("--config", config_help_only, "Flat key=value file mirroring the subcommand's flags (command line wins)");

  // build-dict
  std::string bd_manifest, bd_ctm, bd_out;
  BuildOptions bd_opts;
  auto* build = app.add_subcommand("build-dict", "Build an audio dictionary from features and alignments");
  build->add_option("--manifest", bd_manifest, "Corpus manifest TSV")->required();
  build->add_option("--ctm", bd_ctm, "Word alignments in CTM format")->required();
  build->add_option("--out", bd_out, "Output ADAD file")->required();
  build->add_option("--max-pool", bd_opts.max_pool, "Cap per-token pool size (0 = unlimited)")->capture_default_str();
  build->add_option("--min-frames", bd_opts.min_frames, "Skip segments shorter than this")->capture_default_str();
  build->add_option("--seed", bd_opts.seed, "Seed for pool capping")->capture_default_str();

  // augment
  AugmentFlags aug;
  std::string aug_mode = "ada-rt", aug_out, aug_trace;
  std::uint64_t aug_epoch = 0;
  bool aug_stream = false;
  std::size_t aug_workers = 1;
  auto* augment = app.add_subcommand("augment", "Augment a corpus for one epoch");
  add_augment_flags(augment, aug);
  augment->add_option("--mode", aug_mode, "Augmentation mode")
      ->check(CLI::IsMember({"ada-rt", "ada-lm", "dict-only", "lm-only", "specaugment"}))
      ->capture_default_str();
  augment->add_option("--epoch", aug_epoch, "Epoch number (varies the draws)")->capture_default_str();
  augment->add_option("--out-dir", aug_out, "Write ADAF files and manifest.tsv here");
  augment->add_flag("--stream", aug_stream, "Write ADAB records to standard output");
  augment->add_option("--trace", aug_trace, "Write one JSON trace line per utterance");
  augment->add_option("--workers", aug_workers, "Worker threads")->capture_default_str();

  // inspect-dict
  std::string id_path, id_token;
  auto* inspect = app.add_subcommand("inspect-dict", "Print dictionary statistics");
  inspect->add_option("--dict", id_path, "ADAD file")->required();
  inspect->add_option("--token", id_token, "Also list this token's pool");

  // wer
  std::string wer_ref, wer_hyp, wer_scores;
  auto* wer = app.add_subcommand("wer", "Micro word error rate");
  wer->add_option("--ref", wer_ref, "Reference TSV (utt_id<TAB>tokens)")->required();
  wer->add_option("--hyp", wer_hyp, "Hypothesis TSV (utt_id<TAB>tokens)")->required();
  wer->add_option("--scores-out", wer_scores, "Write a per-utterance score TSV");

  // sigtest
  std::string sig_a, sig_b;
  SigTestConfig sig_cfg;
  std::uint64_t sig_seed = 0;
  auto* sig = app.add_subcommand("sigtest", "Approximate randomization test between two systems");
  sig->add_option("--a", sig_a, "Score TSV of system A")->required();
  sig->add_option("--b", sig_b, "Score TSV of system B")->required();
  sig->add_option("--shuffles", sig_cfg.n_shuffles, "Random swap patterns")->capture_default_str();
  sig->add_option("--swap-prob", sig_cfg.swap_probability, "Per-example swap probability")->capture_default_str();
  sig->add_option("--alpha", sig_cfg.alpha, "Significance level before correction")->capture_default_str();
  sig->add_option("--comparisons", sig_cfg.n_comparisons, "Comparisons for Bonferroni")->capture_default_str();
  sig->add_option("--seed", sig_seed, "Seed")->capture_default_str();

  // bench
  AugmentFlags bench_flags;
  std::vector<std::string> bench_modes{"ada-rt"};
  std::size_t bench_repeat = 3;
  auto* bench = app.add_subcommand("bench", "Per-utterance augmentation cost relative to SpecAugment");
  add_augment_flags(bench, bench_flags);
  bench->add_option("--mode", bench_modes, "Modes to time (specaugment is always included)")
      ->check(CLI::IsMember({"ada-rt", "ada-lm", "dict-only", "lm-only", "specaugment"}))
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->capture_default_str();
  bench->add_option("--repeat", bench_repeat, "Timing samples per mode")->capture_default_str();

  // extract-fbank
  std::string fb_in, fb_out;
  int fb_rate = 16000;
  FbankConfig fb;
  auto* fbank = app.add_subcommand("extract-fbank", "Log-mel filterbank features from PCM16 audio");
  fbank->add_option("--input", fb_in, "WAV (PCM16 mono) or headerless s16le file")->required();
  fbank->add_option("--out", fb_out, "Output ADAF file")->required();
  fbank->add_option("--sample-rate", fb_rate, "Rate of headerless input")->capture_default_str();
  fbank->add_option("--n-mels", fb.n_mels, "Mel bands")->capture_default_str();
  fbank->add_option("--window-ms", fb.window_ms, "Window length")->capture_default_str();
  fbank->add_option("--hop-ms", fb.hop_ms, "Hop length")->capture_default_str();
  fbank->add_option("--fft-size", fb.fft_size, "FFT points")->capture_default_str();
  fbank->add_option("--fmin", fb.fmin, "Lowest filter edge (Hz)")->capture_default_str();
  fbank->add_option("--fmax", fb.fmax, "Highest filter edge (Hz)")->capture_default_str();

  // filter-corpus
  std::string fc_manifest, fc_out;
  std::size_t fc_frames = 3000, fc_units = 80;
  auto* filter = app.add_subcommand("filter-corpus", "Drop over-long utterances from a manifest");
  filter->add_option("--manifest", fc_manifest, "Input manifest TSV")->required();
  filter->add_option("--out", fc_out, "Output manifest TSV")->required();
  filter->add_option("--max-frames", fc_frames, "Keep entries with at most this many frames")->capture_default_str();
  filter->add_option("--max-units", fc_units, "Keep entries with at most this many tokens")->capture_default_str();

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  std::vector<char*> arg_ptrs;
  for (auto& a : args) arg_ptrs.push_back(a.data());

  try {
    app.parse(static_cast<int>(arg_ptrs.size()), arg_ptrs.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*build) return cmd_build_dict(bd_manifest, bd_ctm, bd_out, bd_opts);
    if (*augment) return cmd_augment(aug, aug_mode, aug_epoch, aug_out, aug_stream, aug_trace, aug_workers);
    if (*inspect) return cmd_inspect_dict(id_path, id_token);
    if (*wer) return cmd_wer(wer_ref, wer_hyp, wer_scores);
    if (*sig) return cmd_sigtest(sig_a, sig_b, sig_cfg, sig_seed);
    if (*bench) return cmd_bench(bench_flags, bench_modes, bench_repeat);
    if (*fbank) return cmd_extract_fbank(fb_in, fb_out, fb_rate, fb);
    if (*filter) return cmd_filter_corpus(fc_manifest, fc_out, fc_frames, fc_units);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_dependency_failure() ? kExitDependency : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace ada::cli

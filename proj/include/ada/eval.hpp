#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ada/rng.hpp"

namespace ada {

struct WerCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;

  std::size_t errors() const noexcept { return substitutions + deletions + insertions; }
  /// errors / ref_len. Throws EmptyReference when ref_len == 0.
  double wer() const;

  WerCounts& operator+=(const WerCounts& o) noexcept {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_len += o.ref_len;
    return *this;
  }
  friend bool operator==(const WerCounts&, const WerCounts&) = default;
};

/// Levenshtein alignment with unit costs. On ties the backtrace prefers
/// substitution, then deletion, then insertion.
WerCounts wer_counts(std::span<const std::string> ref, std::span<const std::string> hyp);

using RefHypPair = std::pair<std::vector<std::string>, std::vector<std::string>>;

/// Micro average: total errors over total reference tokens.
/// Throws EmptyReference when no pair has reference tokens.
double corpus_wer(std::span<const RefHypPair> pairs);

/// Per-utterance scores of one system across training runs.
struct ScoredExample {
  std::string utt_id;
  std::size_t ref_len = 0;
  std::vector<double> errors_per_run;
};

/// Mean of errors_per_run. Throws InvalidArgument when there are no runs.
double average_runs(const ScoredExample& e);

struct SigTestConfig {
  std::size_t n_shuffles = 1000;
  double swap_probability = 0.5;
  double alpha = 0.01;
  std::size_t n_comparisons = 1;

  void check() const;
};

struct SigTestResult {
  double p_value = 1.0;
  double observed = 0.0;  // |WER(a) - WER(b)|
  bool exact = false;     // full enumeration instead of sampling
  std::size_t n_trials = 0;
};

/// Paired approximate randomization test on per-example error counts.
/// The statistic is |sum(a) - sum(b)| / sum(ref_lens). With 2^n <= R all
/// swap patterns are enumerated and p is exact; otherwise R random swap
/// patterns give p = (hits + 1) / (R + 1).
/// Throws LengthMismatch, EmptyReference, InvalidArgument.
SigTestResult randomization_test(std::span<const double> a, std::span<const double> b,
                                 std::span<const std::size_t> ref_lens, const SigTestConfig& cfg,
                                 Rng& rng);

/// alpha / m.
double bonferroni(double alpha, std::size_t m);

/// Score TSV: utt_id<TAB>ref_len<TAB>err_run1[,err_run2,...]
std::vector<ScoredExample> parse_scores(std::string_view tsv);
std::vector<ScoredExample> read_scores(const std::filesystem::path& path);

/// Transcript TSV: utt_id<TAB>tokens (lowercased, whitespace split).
std::vector<std::pair<std::string, std::vector<std::string>>> parse_transcripts(std::string_view tsv);
std::vector<std::pair<std::string, std::vector<std::string>>> read_transcripts(
    const std::filesystem::path& path);

}  // namespace ada

#include "ada/eval.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "ada/error.hpp"
#include "ada/features.hpp"

namespace ada {

double WerCounts::wer() const {
  if (ref_len == 0) throw Error(Errc::EmptyReference, "WER of an empty reference");
  return static_cast<double>(errors()) / static_cast<double>(ref_len);
}

WerCounts wer_counts(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t R = ref.size();
  const std::size_t H = hyp.size();
  const std::size_t W = H + 1;
  std::vector<std::size_t> cost((R + 1) * W);
  for (std::size_t i = 0; i <= R; ++i) cost[i * W] = i;
  for (std::size_t j = 0; j <= H; ++j) cost[j] = j;
  for (std::size_t i = 1; i <= R; ++i) {
    for (std::size_t j = 1; j <= H; ++j) {
      const std::size_t diag = cost[(i - 1) * W + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::size_t del = cost[(i - 1) * W + j] + 1;
      const std::size_t ins = cost[i * W + j - 1] + 1;
      cost[i * W + j] = std::min({diag, del, ins});
    }
  }

  WerCounts c;
  c.ref_len = R;
  std::size_t i = R;
  std::size_t j = H;
  while (i > 0 || j > 0) {
    const std::size_t here = cost[i * W + j];
    if (i > 0 && j > 0) {
      const bool match = ref[i - 1] == hyp[j - 1];
      if (cost[(i - 1) * W + j - 1] + (match ? 0 : 1) == here) {
        if (!match) ++c.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cost[(i - 1) * W + j] + 1 == here) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

double corpus_wer(std::span<const RefHypPair> pairs) {
  WerCounts total;
  for (const auto& [ref, hyp] : pairs) total += wer_counts(ref, hyp);
  return total.wer();
}

double average_runs(const ScoredExample& e) {
  if (e.errors_per_run.empty()) throw Error(Errc::InvalidArgument, e.utt_id + ": no runs");
  return std::accumulate(e.errors_per_run.begin(), e.errors_per_run.end(), 0.0) /
         static_cast<double>(e.errors_per_run.size());
}

void SigTestConfig::check() const {
  if (n_shuffles == 0) throw Error(Errc::InvalidArgument, "n_shuffles must be >= 1");
  if (!(swap_probability > 0.0 && swap_probability < 1.0)) {
    throw Error(Errc::InvalidArgument, "swap_probability must lie in (0, 1)");
  }
  if (n_comparisons == 0) throw Error(Errc::InvalidArgument, "n_comparisons must be >= 1");
}

SigTestResult randomization_test(std::span<const double> a, std::span<const double> b,
                                 std::span<const std::size_t> ref_lens, const SigTestConfig& cfg,
                                 Rng& rng) {
  cfg.check();
  const std::size_t n = a.size();
  if (b.size() != n || ref_lens.size() != n) {
    throw Error(Errc::LengthMismatch, std::to_string(a.size()) + "/" + std::to_string(b.size()) +
                                          "/" + std::to_string(ref_lens.size()));
  }
  if (n == 0) throw Error(Errc::InvalidArgument, "randomization test needs at least one example");
  const double total_ref = static_cast<double>(std::accumulate(ref_lens.begin(), ref_lens.end(), std::size_t{0}));
  if (total_ref == 0.0) throw Error(Errc::EmptyReference, "all references are empty");

  // Swapping example i flips the sign of its contribution to sum(a) - sum(b),
  // so each trial's numerator is |sum_i s_i d_i| with s_i in {+1, -1}.
  std::vector<double> diff(n);
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = a[i] - b[i];
    abs_sum += std::abs(diff[i]);
  }
  const double observed = std::abs(std::accumulate(diff.begin(), diff.end(), 0.0));
  // Sums of the same terms in another order may differ in the last bits.
  const double tol = 1e-9 * (abs_sum + 1.0);
  auto reaches = [&](double stat) { return stat >= observed - tol; };

  SigTestResult res;
  res.observed = observed / total_ref;

  const bool exact = n < 63 && (std::uint64_t{1} << n) <= cfg.n_shuffles;
  if (exact) {
    const std::uint64_t patterns = std::uint64_t{1} << n;
    const double q = cfg.swap_probability;
    const bool fair = q == 0.5;
    std::uint64_t hits = 0;
    double mass = 0.0;  // probability of the reaching patterns, for q != 0.5
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
      double s = 0.0;
      int swaps = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool swapped = (mask >> i) & 1u;
        s += swapped ? -diff[i] : diff[i];
        swaps += swapped;
      }
      if (reaches(std::abs(s))) {
        ++hits;
        if (!fair) mass += std::pow(q, swaps) * std::pow(1.0 - q, static_cast<double>(n) - swaps);
      }
    }
    res.exact = true;
    res.n_trials = patterns;
    res.p_value = fair ? static_cast<double>(hits) / static_cast<double>(patterns) : mass;
    return res;
  }

  std::uint64_t hits = 0;
  for (std::size_t r = 0; r < cfg.n_shuffles; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += rng.bernoulli(cfg.swap_probability) ? -diff[i] : diff[i];
    hits += reaches(std::abs(s));
  }
  res.n_trials = cfg.n_shuffles;
  res.p_value = static_cast<double>(hits + 1) / static_cast<double>(cfg.n_shuffles + 1);
  return res;
}

double bonferroni(double alpha, std::size_t m) {
  if (m == 0) throw Error(Errc::InvalidArgument, "bonferroni with zero comparisons");
  return alpha / static_cast<double>(m);
}

// ---------------------------------------------------------------------------

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) f(line, line_no);
  }
}

double parse_number(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v) || v < 0.0) {
    throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": bad count '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<ScoredExample> parse_scores(std::string_view tsv) {
  std::vector<ScoredExample> out;
  std::unordered_set<std::string> seen;
  for_each_line(tsv, [&](std::string_view line, std::size_t line_no) {
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || t1 == 0) {
      throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) +
                                           ": expected utt_id<TAB>ref_len<TAB>errors");
    }
    ScoredExample e;
    e.utt_id = std::string(line.substr(0, t1));
    const double ref_len = parse_number(line.substr(t1 + 1, t2 - t1 - 1), line_no);
    if (ref_len != std::floor(ref_len)) {
      throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": ref_len not an integer");
    }
    e.ref_len = static_cast<std::size_t>(ref_len);
    std::string_view runs = line.substr(t2 + 1);
    while (true) {
      const auto comma = runs.find(',');
      e.errors_per_run.push_back(parse_number(runs.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      runs.remove_prefix(comma + 1);
    }
    if (!seen.insert(e.utt_id).second) throw Error(Errc::DuplicateUtterance, e.utt_id);
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<ScoredExample> read_scores(const std::filesystem::path& path) {
  return parse_scores(slurp(path));
}

std::vector<std::pair<std::string, std::vector<std::string>>> parse_transcripts(std::string_view tsv) {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  std::unordered_set<std::string> seen;
  for_each_line(tsv, [&](std::string_view line, std::size_t line_no) {
    const auto tab = line.find('\t');
    if (tab == 0) throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": empty utt_id");
    std::string id(line.substr(0, tab));
    auto tokens = tab == std::string_view::npos ? std::vector<std::string>{}
                                                : tokenize_transcript(line.substr(tab + 1));
    if (!seen.insert(id).second) throw Error(Errc::DuplicateUtterance, id);
    out.emplace_back(std::move(id), std::move(tokens));
  });
  return out;
}

std::vector<std::pair<std::string, std::vector<std::string>>> read_transcripts(
    const std::filesystem::path& path) {
  return parse_transcripts(slurp(path));
}

}  // namespace ada

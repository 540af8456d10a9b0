#pragma once

#include <cstddef>
#include <string_view>

namespace ada {

/// Per-sentence / per-token augmentation fractions.
struct MixtureSchedule {
  double p_aligned_sent = 0.0;  // share of sentences given aligned replacement
  double f_aligned_tok = 0.0;   // share of their tokens replaced
  double p_dict_sent = 0.0;     // share of sentences given dictionary-only replacement
  double f_dict_tok = 0.0;      // share of their tokens replaced

  /// Throws InvalidArgument unless all fields are in [0,1] and the two
  /// sentence probabilities sum to at most 1.
  void check() const;

  friend bool operator==(const MixtureSchedule&, const MixtureSchedule&) = default;
};

inline constexpr MixtureSchedule kLibri100{0.50, 0.20, 0.15, 0.20};
inline constexpr MixtureSchedule kLibri960{0.30, 0.20, 0.21, 0.15};

/// Resolves "libri100" / "libri960". Throws InvalidArgument otherwise.
MixtureSchedule schedule_preset(std::string_view name);

enum class SentenceMode { Aligned, DictOnly, Unchanged };

std::string_view to_string(SentenceMode mode) noexcept;

/// Aligned if u < p_aligned_sent, DictOnly if u < p_aligned_sent +
/// p_dict_sent, else Unchanged. `u` is a uniform draw in [0, 1).
constexpr SentenceMode assign_mode(double u, const MixtureSchedule& s) noexcept {
  if (u < s.p_aligned_sent) return SentenceMode::Aligned;
  if (u < s.p_aligned_sent + s.p_dict_sent) return SentenceMode::DictOnly;
  return SentenceMode::Unchanged;
}

/// max(1, round_half_up(f * n_tokens)), or 0 when f == 0; never more than
/// n_tokens.
std::size_t n_replacements(std::size_t n_tokens, double f);

}  // namespace ada

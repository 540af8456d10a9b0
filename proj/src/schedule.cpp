#include "ada/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ada/error.hpp"

namespace ada {

namespace {
bool unit(double v) { return v >= 0.0 && v <= 1.0; }
}  // namespace

void MixtureSchedule::check() const {
  if (!unit(p_aligned_sent) || !unit(f_aligned_tok) || !unit(p_dict_sent) || !unit(f_dict_tok)) {
    throw Error(Errc::InvalidArgument, "schedule fractions must lie in [0, 1]");
  }
  if (p_aligned_sent + p_dict_sent > 1.0 + 1e-12) {
    throw Error(Errc::InvalidArgument, "aligned + dict-only sentence shares exceed 1");
  }
}

MixtureSchedule schedule_preset(std::string_view name) {
  if (name == "libri100") return kLibri100;
  if (name == "libri960") return kLibri960;
  throw Error(Errc::InvalidArgument, "unknown schedule preset '" + std::string(name) + "'");
}

std::string_view to_string(SentenceMode mode) noexcept {
  switch (mode) {
    case SentenceMode::Aligned: return "aligned";
    case SentenceMode::DictOnly: return "dict-only";
    case SentenceMode::Unchanged: return "unchanged";
  }
  return "?";
}

std::size_t n_replacements(std::size_t n_tokens, double f) {
  if (f <= 0.0 || n_tokens == 0) return 0;
  const auto k = static_cast<std::size_t>(std::floor(f * static_cast<double>(n_tokens) + 0.5 + 1e-9));
  return std::min(n_tokens, std::max<std::size_t>(1, k));
}

}  // namespace ada

#include "ada/alignment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_map>

#include "ada/error.hpp"
#include "ada/features.hpp"

namespace ada {

std::vector<std::string> AlignedUtterance::tokens() const {
  std::vector<std::string> out;
  out.reserve(spans.size());
  for (const auto& s : spans) out.push_back(s.token);
  return out;
}

std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

FrameRange to_frames(double tbeg, double tdur, double fps) {
  if (!(tbeg >= 0.0) || !std::isfinite(tbeg)) {
    throw Error(Errc::NegativeTime, "tbeg=" + std::to_string(tbeg));
  }
  if (!(tdur > 0.0) || !std::isfinite(tdur)) {
    throw Error(Errc::NegativeTime, "tdur=" + std::to_string(tdur));
  }
  const std::size_t start = round_half_up(tbeg * fps);
  const std::size_t end = std::max(start + 1, round_half_up((tbeg + tdur) * fps));
  return {start, end};
}

namespace {

struct CtmRow {
  double tbeg;
  double tdur;
  std::string word;
  std::size_t line_no;
};

bool parse_double(std::string_view s, double& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

}  // namespace

std::vector<AlignedUtterance> parse_ctm(std::string_view text, const CtmOptions& opts) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<CtmRow>> rows;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    const auto fields = split_ws(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() < 5 || fields.size() > 6) {
      throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": expected 5 or 6 fields");
    }
    CtmRow row{};
    if (!parse_double(fields[2], row.tbeg) || !parse_double(fields[3], row.tdur)) {
      throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": bad time value");
    }
    if (row.tbeg < 0.0 || row.tdur <= 0.0) {
      throw Error(Errc::NegativeTime, "line " + std::to_string(line_no));
    }
    const auto words = tokenize_transcript(fields[4]);
    row.word = words.front();
    row.line_no = line_no;
    if (opts.silence_tokens.contains(row.word)) continue;

    std::string utt(fields[0]);
    auto [it, inserted] = rows.try_emplace(utt);
    if (inserted) order.push_back(utt);
    it->second.push_back(std::move(row));
  }

  std::vector<AlignedUtterance> out;
  out.reserve(order.size());
  for (const auto& utt : order) {
    auto& group = rows[utt];
    std::stable_sort(group.begin(), group.end(),
                     [](const CtmRow& a, const CtmRow& b) { return a.tbeg < b.tbeg; });
    AlignedUtterance a{utt, {}};
    a.spans.reserve(group.size());
    for (const auto& r : group) {
      const auto fr = to_frames(r.tbeg, r.tdur, opts.fps);
      if (!a.spans.empty()) {
        auto& prev = a.spans.back();
        if (fr.start_frame <= prev.start_frame) {
          throw Error(Errc::NonMonotonicAlignment,
                      utt + ": '" + r.word + "' (line " + std::to_string(r.line_no) +
                          ") starts at or before the previous word's start frame");
        }
        if (prev.end_frame > fr.start_frame) prev.end_frame = fr.start_frame;
      }
      a.spans.push_back(TokenSpan{r.word, fr.start_frame, fr.end_frame});
    }
    out.push_back(std::move(a));
  }
  return out;
}

AlignedUtterance validate(const AlignedUtterance& a, std::size_t n_frames) {
  AlignedUtterance out = a;
  std::size_t prev_end = 0;
  for (auto& s : out.spans) {
    if (s.token.empty() || s.start_frame >= s.end_frame) {
      throw Error(Errc::SpanOutOfRange, a.utt_id + ": malformed span for '" + s.token + "'");
    }
    if (s.start_frame < prev_end) {
      throw Error(Errc::SpanOutOfRange, a.utt_id + ": span '" + s.token + "' overlaps its predecessor");
    }
    s.end_frame = std::min(s.end_frame, n_frames);
    if (s.start_frame >= s.end_frame) {
      throw Error(Errc::EmptySpanAfterClamp, a.utt_id + ": '" + s.token + "' starts at frame " +
                                                 std::to_string(s.start_frame) + " of " +
                                                 std::to_string(n_frames));
    }
    prev_end = s.end_frame;
  }
  return out;
}

bool spans_consistent(const std::vector<TokenSpan>& spans, std::size_t n_frames) noexcept {
  std::size_t prev_end = 0;
  for (const auto& s : spans) {
    if (s.token.empty() || s.start_frame >= s.end_frame || s.start_frame < prev_end) return false;
    prev_end = s.end_frame;
  }
  return prev_end <= n_frames;
}

}  // namespace ada

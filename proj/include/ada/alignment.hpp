#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ada {

/// One aligned word; frames [start_frame, end_frame).
struct TokenSpan {
  std::string token;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;

  std::size_t width() const noexcept { return end_frame - start_frame; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct AlignedUtterance {
  std::string utt_id;
  std::vector<TokenSpan> spans;

  std::vector<std::string> tokens() const;
  friend bool operator==(const AlignedUtterance&, const AlignedUtterance&) = default;
};

struct FrameRange {
  std::size_t start_frame;
  std::size_t end_frame;
  friend bool operator==(const FrameRange&, const FrameRange&) = default;
};

/// floor(x + 0.5), with a 1e-9 guard so that values like 0.285 * 100
/// (28.499999999999996 in binary) still round up.
std::size_t round_half_up(double x);

/// Seconds to frames. end is at least start + 1. Throws NegativeTime.
FrameRange to_frames(double tbeg, double tdur, double fps = 100.0);

struct CtmOptions {
  double fps = 100.0;
  std::set<std::string, std::less<>> silence_tokens{"<eps>", "sil", "sp", "spn", "<unk>"};
};

/// Parses CTM text (`utt channel tbeg tdur word [conf]`, `#` comments).
/// Returns one utterance per distinct utt_id in order of first appearance,
/// spans sorted by start time, silence dropped, and overlaps from rounding
/// repaired by truncating the earlier span.
/// Throws MalformedLine, NegativeTime, NonMonotonicAlignment.
std::vector<AlignedUtterance> parse_ctm(std::string_view text, const CtmOptions& opts = {});

/// Clamps spans to [0, n_frames) and checks ordering. Returns the clamped
/// copy. Throws EmptySpanAfterClamp or SpanOutOfRange.
AlignedUtterance validate(const AlignedUtterance& a, std::size_t n_frames);

/// True if spans are sorted, non-overlapping, non-empty and end <= n_frames.
bool spans_consistent(const std::vector<TokenSpan>& spans, std::size_t n_frames) noexcept;

}  // namespace ada

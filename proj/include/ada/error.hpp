#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ada {

enum class Errc {
  InvalidArgument,
  IoFailure,
  BadMagic,
  TruncatedFile,
  NonFiniteValue,
  VersionMismatch,
  BadSampleRate,
  MissingFeatureFile,
  MalformedManifest,
  DuplicateUtterance,
  NegativeTime,
  MalformedLine,
  NonMonotonicAlignment,
  SpanOutOfRange,
  EmptySpanAfterClamp,
  UnknownUtterance,
  DimensionMismatch,
  EmptyKeySet,
  EmptyCandidates,
  ServerUnreachable,
  ProtocolError,
  Timeout,
  LengthMismatch,
  EmptyReference,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc codes, so
/// callers (the CLI in particular) can map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

  /// True for failures of an external dependency (the LM endpoint).
  bool is_dependency_failure() const noexcept {
    return code_ == Errc::ServerUnreachable || code_ == Errc::Timeout ||
           code_ == Errc::ProtocolError;
  }

 private:
  Errc code_;
};

}  // namespace ada

#include "ada/error.hpp"

namespace ada {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoFailure: return "IoFailure";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::BadSampleRate: return "BadSampleRate";
    case Errc::MissingFeatureFile: return "MissingFeatureFile";
    case Errc::MalformedManifest: return "MalformedManifest";
    case Errc::DuplicateUtterance: return "DuplicateUtterance";
    case Errc::NegativeTime: return "NegativeTime";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::NonMonotonicAlignment: return "NonMonotonicAlignment";
    case Errc::SpanOutOfRange: return "SpanOutOfRange";
    case Errc::EmptySpanAfterClamp: return "EmptySpanAfterClamp";
    case Errc::UnknownUtterance: return "UnknownUtterance";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyKeySet: return "EmptyKeySet";
    case Errc::EmptyCandidates: return "EmptyCandidates";
    case Errc::ServerUnreachable: return "ServerUnreachable";
    case Errc::ProtocolError: return "ProtocolError";
    case Errc::Timeout: return "Timeout";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyReference: return "EmptyReference";
  }
  return "Unknown";
}

}  // namespace ada

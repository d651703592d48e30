#include "resp/error.hpp"

namespace resp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedName: return "MalformedName";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConflictingDiagnosis: return "ConflictingDiagnosis";
    case ErrorKind::MissingAnnotation: return "MissingAnnotation";
    case ErrorKind::UnsupportedAudio: return "UnsupportedAudio";
    case ErrorKind::Io: return "Io";
    case ErrorKind::InvalidBand: return "InvalidBand";
    case ErrorKind::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::InsufficientExtrema: return "InsufficientExtrema";
    case ErrorKind::EmptyImfSet: return "EmptyImfSet";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::ExcludedClass: return "ExcludedClass";
    case ErrorKind::EmptyManifest: return "EmptyManifest";
    case ErrorKind::IndivisibleBatch: return "IndivisibleBatch";
    case ErrorKind::BadClassCount: return "BadClassCount";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::MissingCache: return "MissingCache";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace resp

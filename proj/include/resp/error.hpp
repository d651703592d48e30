#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace resp {

enum class ErrorKind {
  MalformedName,
  ParseError,
  ConflictingDiagnosis,
  MissingAnnotation,
  UnsupportedAudio,
  Io,
  InvalidBand,
  SampleRateMismatch,
  TooShort,
  InsufficientExtrema,
  EmptyImfSet,
  LengthMismatch,
  TooSmall,
  ExcludedClass,
  EmptyManifest,
  IndivisibleBatch,
  BadClassCount,
  ShapeMismatch,
  MissingCache,
  LabelOutOfRange,
  EmptyMatrix,
  Config,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as this exception; `kind()` is the stable part.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace resp

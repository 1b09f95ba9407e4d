#pragma once

#include <stdexcept>
#include <string>

namespace cloakvit {

enum class ErrorCode {
  KeyFormat,
  EmptyDomain,
  LengthMismatch,
  Shape,
  Config,
  BlockPatchMismatch,
  NormalizationMode,
  BadMagic,
  VersionMismatch,
  ShapeTable,
  PayloadLength,
  NonFinite,
  Format,
  Io,
  UnmatchedLabel,
  EmptyManifest,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cloakvit

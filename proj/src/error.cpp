#include "cloakvit/error.hpp"

namespace cloakvit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::KeyFormat: return "key-format";
    case ErrorCode::EmptyDomain: return "empty-domain";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::Shape: return "shape";
    case ErrorCode::Config: return "config";
    case ErrorCode::BlockPatchMismatch: return "block-patch-mismatch";
    case ErrorCode::NormalizationMode: return "normalization-mode";
    case ErrorCode::BadMagic: return "bad-magic";
    case ErrorCode::VersionMismatch: return "version-mismatch";
    case ErrorCode::ShapeTable: return "shape-table";
    case ErrorCode::PayloadLength: return "payload-length";
    case ErrorCode::NonFinite: return "non-finite";
    case ErrorCode::Format: return "format";
    case ErrorCode::Io: return "io";
    case ErrorCode::UnmatchedLabel: return "unmatched-label";
    case ErrorCode::EmptyManifest: return "empty-manifest";
  }
  return "unknown";
}

}  // namespace cloakvit

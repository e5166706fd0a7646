#include "rqgmm/error.hpp"

namespace rqgmm {

const char* to_string(FormatErrorKind kind) noexcept {
    switch (kind) {
        case FormatErrorKind::kIo: return "io";
        case FormatErrorKind::kBadMagic: return "bad-magic";
        case FormatErrorKind::kUnsupportedVersion: return "unsupported-version";
        case FormatErrorKind::kMalformedHeader: return "malformed-header";
        case FormatErrorKind::kSizeMismatch: return "size-mismatch";
        case FormatErrorKind::kNonFinite: return "non-finite";
        case FormatErrorKind::kTruncated: return "truncated";
        case FormatErrorKind::kInconsistent: return "inconsistent";
        case FormatErrorKind::kMissingKey: return "missing-key";
        case FormatErrorKind::kBadKey: return "bad-key";
    }
    return "unknown";
}

namespace {

std::string format_message(FormatErrorKind kind, const std::string& path, std::int64_t offset,
                           const std::string& detail) {
    std::string msg = path;
    if (offset >= 0) msg += " @ byte " + std::to_string(offset);
    msg += ": ";
    msg += to_string(kind);
    msg += ": ";
    msg += detail;
    return msg;
}

}  // namespace

FormatError::FormatError(FormatErrorKind kind, const std::string& path, std::int64_t offset,
                         const std::string& detail)
    : Error(format_message(kind, path, offset, detail)),
      kind_(kind),
      path_(path),
      offset_(offset) {}

}  // namespace rqgmm

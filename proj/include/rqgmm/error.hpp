#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rqgmm {

// Base of everything the library throws on bad input or failed fits.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller handed us something that violates a precondition (shape, range, NaN).
class InputError : public Error {
public:
    using Error::Error;
};

// A fitter could not produce a valid model (e.g. a starved mixture component).
// level() and component() are 0-based, -1 when unknown; messages count levels from 1.
class FitError : public Error {
public:
    FitError(const std::string& what, int level = -1, int component = -1)
        : Error(what), level_(level), component_(component) {}

    int level() const noexcept { return level_; }
    int component() const noexcept { return component_; }

private:
    int level_;
    int component_;
};

// Should be unreachable; signals a broken internal invariant.
class InternalError : public Error {
public:
    using Error::Error;
};

enum class FormatErrorKind {
    kIo,
    kBadMagic,
    kUnsupportedVersion,
    kMalformedHeader,
    kSizeMismatch,
    kNonFinite,
    kTruncated,
    kInconsistent,
    kMissingKey,
    kBadKey,
};

const char* to_string(FormatErrorKind kind) noexcept;

// File-format error. Carries the path and the byte offset where reading
// stopped making sense (-1 when no single offset applies).
class FormatError : public Error {
public:
    FormatError(FormatErrorKind kind, const std::string& path, std::int64_t offset,
                const std::string& detail);

    FormatErrorKind kind() const noexcept { return kind_; }
    const std::string& path() const noexcept { return path_; }
    std::int64_t offset() const noexcept { return offset_; }

private:
    FormatErrorKind kind_;
    std::string path_;
    std::int64_t offset_;
};

}  // namespace rqgmm

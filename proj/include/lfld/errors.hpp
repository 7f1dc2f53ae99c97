#pragma once

#include <stdexcept>
#include <string>

namespace lfld {

// Error taxonomy used across the library. All are runtime_error so callers
// that do not care about the category can catch one type.

/// Tensor/operation shape incompatibilities.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad user-facing configuration (unknown keys, impossible sizes, bad ranges).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated call contract (negative dt, non-scalar loss, non-increasing times).
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Object used in an invalid state (backward twice, missing stats).
class StateError : public std::runtime_error {
public:
    explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed file on disk (bad magic, unparsable header).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File format version not supported by this build.
class VersionError : public FormatError {
public:
    explicit VersionError(const std::string& msg) : FormatError(msg) {}
};

/// File contents inconsistent with their own metadata (truncation, size mismatch).
class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Optimization blew up: non-finite loss or gradient. The message names the
/// offending quantity (parameter block or epoch) so the caller can report it.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lfld

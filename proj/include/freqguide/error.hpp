// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace freqguide {

enum class ErrorKind { shape, format, usage, domain, config, io };

inline const char* kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::shape: return "shape_error";
    case ErrorKind::format: return "format_error";
    case ErrorKind::usage: return "usage_error";
    case ErrorKind::domain: return "domain_error";
    case ErrorKind::config: return "config_error";
    case ErrorKind::io: return "io_error";
    }
    return "error";
}

/// Process exit code for an error category. Zero is reserved for success.
inline int exit_code(ErrorKind kind) {
    return 2 + static_cast<int>(kind);
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed tensor file. offset is the byte position of the problem.
class FormatError : public Error {
public:
    FormatError(std::uint64_t offset, const std::string& message)
        : Error(ErrorKind::format, message + " at byte " + std::to_string(offset)),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Bad configuration value. line is 1-based, 0 when the value came from a flag.
class ConfigError : public Error {
public:
    ConfigError(std::size_t line, const std::string& message)
        : Error(ErrorKind::config,
                line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace freqguide

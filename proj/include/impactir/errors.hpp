#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace impactir {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input line. `line` is 1-based.
struct ParseError : Error {
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line(line)
    {}
    std::size_t line;
};

struct DuplicateKeyError : Error {
    DuplicateKeyError(std::size_t line, const std::string& key)
        : Error("line " + std::to_string(line) + ": duplicate key '" + key + "'"),
          line(line),
          key(key)
    {}
    std::size_t line;
    std::string key;
};

struct ValidationError : Error {
    using Error::Error;
};

struct RangeError : Error {
    using Error::Error;
};

/// Corrupt or truncated binary index. `offset` is the byte position of the fault.
struct FormatError : Error {
    FormatError(std::size_t offset, const std::string& what)
        : Error("offset " + std::to_string(offset) + ": " + what), offset(offset)
    {}
    std::size_t offset;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace impactir

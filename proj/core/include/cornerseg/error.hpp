#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cornerseg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Box parameters that cannot describe a rectangle (non-positive side, ...).
class InvalidBox : public Error {
public:
    using Error::Error;
};

/// Point sets or rectangles too degenerate for the requested operation.
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

/// Inconsistent configuration: indivisible strides, shape mismatches, bad thresholds.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Scene generator could not place the requested boxes.
class SynthError : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Malformed file content. Carries either a byte offset (binary tensors)
/// or a 1-based line number (JSON-lines), never both.
class FormatError : public Error {
public:
    enum class Location { ByteOffset, Line };

    FormatError(const std::string& path, Location kind, std::size_t where, const std::string& what)
        : Error(path + (kind == Location::ByteOffset ? " (byte " : ":") + std::to_string(where) +
                (kind == Location::ByteOffset ? "): " : ": ") + what),
          path_(path),
          kind_(kind),
          where_(where) {}

    const std::string& path() const noexcept { return path_; }
    Location location_kind() const noexcept { return kind_; }
    std::size_t location() const noexcept { return where_; }

private:
    std::string path_;
    Location kind_;
    std::size_t where_;
};

}  // namespace cornerseg

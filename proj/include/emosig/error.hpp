#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emosig {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input bytes do not parse in the declared format.
class FormatError : public Error {
public:
    FormatError(const std::string& source, std::size_t line, std::size_t column, const std::string& what);

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string source_;
    std::size_t line_;
    std::size_t column_;
};

// Input parsed but violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Bad configuration or missing/unreadable configuration file.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Numerical failure during training (non-finite loss etc).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace emosig

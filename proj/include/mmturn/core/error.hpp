#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmturn {

// Error categories map one-to-one onto CLI exit codes (usage=2, data=3, numeric=4).
enum class ErrorKind { Usage, Data, Numeric, Dimension };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DimensionError : public Error {
public:
    DimensionError(const std::string& where, std::size_t expected, std::size_t actual)
        : Error(ErrorKind::Dimension, where + ": expected width " + std::to_string(expected) +
                                          ", got " + std::to_string(actual)),
          expected_(expected), actual_(actual) {}
    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
    DataError(const std::string& what, std::size_t line)
        : Error(ErrorKind::Data, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

inline void check_dim(const char* where, std::size_t expected, std::size_t actual) {
    if (expected != actual) throw DimensionError(where, expected, actual);
}

}  // namespace mmturn

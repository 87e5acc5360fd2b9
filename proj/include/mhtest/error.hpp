#ifndef MHTEST_ERROR_HPP
#define MHTEST_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mhtest {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (eta <= 0, q in {0,1}, ...).
class domain_error : public error {
public:
    using error::error;
};

/// Malformed input text. Carries the 1-based line number of the offending record.
class parse_error : public error {
public:
    parse_error(std::size_t line, const std::string& what)
        : error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Fewer samples than an operation needs.
class insufficient_data_error : public error {
public:
    using error::error;
};

/// Timestamps that do not strictly increase. line() is 0 when the error did not come from text input.
class ordering_error : public error {
public:
    explicit ordering_error(const std::string& what) : error(what), line_(0) {}
    ordering_error(std::size_t line, const std::string& what)
        : error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A request beyond a documented size limit.
class capacity_error : public error {
public:
    using error::error;
};

/// A capital update whose multiplicative factor would not be strictly positive.
class prudence_error : public error {
public:
    using error::error;
};

/// Invalid configuration (bad parameter combination, unknown option value).
class config_error : public error {
public:
    using error::error;
};

}  // namespace mhtest

#endif  // MHTEST_ERROR_HPP

#pragma once

#include <stdexcept>
#include <string>

namespace mdaudit {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Raised by crosswalk/registry loaders; row is the 1-based source line, 0 if n/a.
class ValidationError : public Error {
public:
    ValidationError(const std::string& msg, std::size_t row = 0)
        : Error(msg), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

class IntegrityError : public Error {
public:
    using Error::Error;
};

class NetworkError : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    ProtocolError(std::string code, const std::string& msg)
        : Error(code + ": " + msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Harvest aborted; last_token is the last resumption token that was served
// successfully (empty if the first page failed).
class HarvestError : public Error {
public:
    HarvestError(const std::string& msg, std::string last_token)
        : Error(msg), last_token_(std::move(last_token)) {}
    const std::string& last_token() const { return last_token_; }

private:
    std::string last_token_;
};

}  // namespace mdaudit

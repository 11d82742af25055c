#pragma once

#include <stdexcept>
#include <string>

namespace tulu {

// Base for all toolkit errors so the CLI can map them to exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

class ValidationError : public Error {
public:
    ValidationError(std::string code, const std::string& msg)
        : Error(code + ": " + msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace tulu

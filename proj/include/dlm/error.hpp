#pragma once

#include <stdexcept>
#include <string>

namespace dlm {

// Failure category; the CLI maps these onto its exit codes.
enum class ErrorKind { config, data, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error config_error(const std::string& msg) { return Error(ErrorKind::config, msg); }
inline Error data_error(const std::string& msg) { return Error(ErrorKind::data, msg); }
inline Error numerical_error(const std::string& msg) { return Error(ErrorKind::numerical, msg); }

}  // namespace dlm

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msle {

/// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorKind { Config, Data, Numeric };

/// Library-wide exception. `code()` is a stable machine-readable name
/// ("NonFinite", "ShapeMismatch", ...) that tests and the CLI match on.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message),
          kind_(kind),
          code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] inline void throw_config(std::string_view code, const std::string& msg) {
    throw Error(ErrorKind::Config, std::string(code), msg);
}
[[noreturn]] inline void throw_data(std::string_view code, const std::string& msg) {
    throw Error(ErrorKind::Data, std::string(code), msg);
}
[[noreturn]] inline void throw_numeric(std::string_view code, const std::string& msg) {
    throw Error(ErrorKind::Numeric, std::string(code), msg);
}

} // namespace msle

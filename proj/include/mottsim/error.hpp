#pragma once

#include <stdexcept>
#include <string>

namespace mottsim {

/// Invalid circuit, device or experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Protocol or config text that failed to parse. Carries a 1-based location.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line, int column = 0)
        : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}

    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] int column() const { return column_; }

private:
    static std::string format(const std::string& what, int line, int column) {
        std::string out = "line " + std::to_string(line);
        if (column > 0) out += ", column " + std::to_string(column);
        return out + ": " + what;
    }

    int line_;
    int column_;
};

/// Integration failure (step underflow, non-finite state).
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
    [[nodiscard]] double time() const { return time_; }

private:
    double time_;
};

}  // namespace mottsim

#pragma once

#include <stdexcept>
#include <string>

namespace svypool {

/// Bad configuration: unknown options, invalid parameter combinations,
/// missing mapped columns. CLI exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data: unparseable cells, empty files. CLI exit code 3.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical and domain failures: degenerate distributions, singular
/// calibration systems, inconsistent variance estimates. CLI exit code 4.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config = 2;
inline constexpr int data = 3;
inline constexpr int numeric = 4;
} // namespace exit_code

} // namespace svypool

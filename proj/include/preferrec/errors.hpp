/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by every module in the library.
 *
 * The CLI maps these onto process exit codes: configuration and usage
 * problems exit with 1, data problems with 2, numerical failures with 3.
 */

#ifndef PREFERREC_ERRORS_HPP
#define PREFERREC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace preferrec {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Invalid configuration value, dimension mismatch, or misuse of an API contract.
class config_error : public error {
public:
    explicit config_error(const std::string& what_arg) : error(what_arg) {}
};

/// Malformed, incomplete, or inconsistent input data.
class data_error : public error {
public:
    explicit data_error(const std::string& what_arg) : error(what_arg) {}
};

/// A recommendation list that violates a structural invariant
/// (wrong length, duplicate items, or items outside the candidate set).
class invalid_solution_error : public error {
public:
    explicit invalid_solution_error(const std::string& what_arg) : error(what_arg) {}
};

/// Non-finite values or other numerical breakdown during training or scoring.
class numeric_error : public error {
public:
    explicit numeric_error(const std::string& what_arg) : error(what_arg) {}
};

} // namespace preferrec

#endif // PREFERREC_ERRORS_HPP

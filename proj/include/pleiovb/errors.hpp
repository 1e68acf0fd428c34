#ifndef PLEIOVB_ERRORS_HPP
#define PLEIOVB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pleiovb {

// Malformed input files, mismatched datasets, invalid values. CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite intermediates, singular solves, failed convergence preconditions.
// CLI exit code 4.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Bad flag combinations detected past argument parsing. CLI exit code 2.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pleiovb

#endif

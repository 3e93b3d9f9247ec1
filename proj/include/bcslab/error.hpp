#pragma once

#include <stdexcept>
#include <string>

namespace bcslab {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Requested value not attainable inside the search bracket.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

// Iteration or factorization failed to converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid run configuration or input file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bcslab

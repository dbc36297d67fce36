#pragma once

#include <stdexcept>
#include <string>

namespace singtrace {

// Base for all library failures. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// malformed files, bad parameters, models violating their declared contract
class InvalidInput : public Error {
public:
    using Error::Error;
};

// evaluation outside the domain of a closed form
class DomainError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double abscissa)
        : Error(what), abscissa_(abscissa) {}
    double abscissa() const { return abscissa_; }

private:
    double abscissa_;
};

class NotInIdeal : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

// an eigenvalue sits on zero at a sample point or refinement ran out
class DegenerateCrossing : public Error {
public:
    using Error::Error;
};

// two computations of the same quantity disagree beyond tolerance
class Inconsistency : public Error {
public:
    using Error::Error;
};

// the answer depends on a resolution parameter that should not matter
class Inconclusive : public Error {
public:
    using Error::Error;
};

}  // namespace singtrace

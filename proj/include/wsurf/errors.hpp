#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wsurf {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rejected input: shape mismatch, corner mismatch, invalid density, bad range.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A point lies outside the validity domain of a closed-form surface.
class DomainError : public Error {
public:
    using Error::Error;
};

// A node where the area element (or J) vanishes and a quotient is undefined.
class DegenerateError : public Error {
public:
    DegenerateError(std::size_t i, std::size_t j, const std::string& what)
        : Error(what + " at node (" + std::to_string(i) + "," + std::to_string(j) + ")"),
          i_(i), j_(j) {}

    std::size_t i() const noexcept { return i_; }
    std::size_t j() const noexcept { return j_; }

private:
    std::size_t i_;
    std::size_t j_;
};

// NaN/Inf produced during iteration.
class NumericalError : public Error {
public:
    NumericalError(int iteration, const std::string& what)
        : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

}  // namespace wsurf

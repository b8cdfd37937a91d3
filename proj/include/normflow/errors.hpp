#pragma once

#include <stdexcept>
#include <string>

namespace normflow {

/// Malformed input (JSON schema violations, bad numbers).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// Frequencies fail the nonresonance certificate.
class ResonanceError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// An integer vector lies outside the range covered by the nonresonance certificate.
class OrderOverflow : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// Internal invariant broken: the exp-polynomial structure of the flow does not hold,
/// or a recursion was scheduled out of order. Never caused by user input.
class StructureError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool ok, const std::string &what)
{
    if (!ok) {
        throw PreconditionError(what);
    }
}

inline void require_same_dof(int a, int b, const char *where)
{
    if (a != b) {
        throw DimensionMismatch(std::string(where) + ": degrees of freedom differ (" + std::to_string(a)
                                + " vs " + std::to_string(b) + ")");
    }
}

} // namespace detail

} // namespace normflow

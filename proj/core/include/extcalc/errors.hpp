#ifndef EXTCALC_ERRORS_HPP
#define EXTCALC_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace extcalc {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operands disagree in dimension or valence.
class ShapeMismatch : public Error {
public:
    using Error::Error;
};

/// Contraction slot outside the tensor's valence.
class SlotOutOfRange : public Error {
public:
    using Error::Error;
};

/// Bundle slot index P outside 1..Q.
class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

/// Malformed expression text. Carries the byte offset of the failure.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class UnknownFunction : public Error {
public:
    using Error::Error;
};

/// A variable name that does not resolve in the enclosing context.
class UnknownVariable : public Error {
public:
    using Error::Error;
};

/// Evaluation left the domain of a smooth function (log of non-positive,
/// division by zero, sqrt of negative, atan2 at the origin).
class DomainError : public Error {
public:
    using Error::Error;
};

/// |det T| of a chart transition fell below the configured floor.
class SingularJacobian : public Error {
public:
    using Error::Error;
};

/// Requested derivative-propagation nesting exceeds the supported order.
class DepthLimit : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace extcalc

#endif

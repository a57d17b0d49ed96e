#pragma once

#include <stdexcept>
#include <string>

namespace cds {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on an argument does not hold.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// An exponential oracle was asked to work on an instance above its cap.
class OracleSizeError : public Error {
public:
    using Error::Error;
};

// Dynamics reached a state where the update is undefined (x'Mx <= 0).
class DegenerateStateError : public Error {
public:
    using Error::Error;
};

// Malformed input file or document.
class ParseError : public Error {
public:
    using Error::Error;
};

// Annotation could not be mapped onto the superpixel graph.
class AnnotationError : public Error {
public:
    using Error::Error;
};

} // namespace cds

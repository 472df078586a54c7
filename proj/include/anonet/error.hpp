#pragma once

#include <stdexcept>
#include <string>

namespace anonet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A graph, schedule, or labeling breaks a model invariant (e.g. a round is
// disconnected, a labeling is not a bijection).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Round or node arguments outside the materialized prefix.
class RangeError : public Error {
public:
    using Error::Error;
};

// The finite schedule prefix is shorter than the requested horizon.
class InsufficientSchedule : public Error {
public:
    using Error::Error;
};

class EncodingError : public Error {
public:
    using Error::Error;
};

// A protocol machine violated the engine contract or its own consistency
// checks.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// A demonstration or check whose preconditions do not hold for the inputs.
class InapplicableError : public Error {
public:
    using Error::Error;
};

} // namespace anonet

#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

// Base for every error raised by the library. Parse/validation problems use
// std::invalid_argument instead so the CLI can map them to usage errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// E[X | X > l] was requested for l at or above the essential supremum.
class QueryBeyondSupport : public Error {
public:
    using Error::Error;
};

// A policy produced a generation time that does not move the source forward.
class NonPositiveWait : public Error {
public:
    using Error::Error;
};

// A policy asked for information the source cannot have yet, or planned a
// send before the epoch it was consulted at.
class CausalityViolation : public Error {
public:
    using Error::Error;
};

class NoBracket : public Error {
public:
    using Error::Error;
};

class NotConverged : public Error {
public:
    using Error::Error;
};

}  // namespace aoi

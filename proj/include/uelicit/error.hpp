#pragma once

#include <stdexcept>
#include <string>

namespace uelicit {

// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Input violates a documented invariant (row sums, anchors, dimensions, ranges).
class ValidationError : public Error
{
public:
    using Error::Error;
};

// A file or document could not be parsed.
class ParseError : public Error
{
public:
    using Error::Error;
};

class NotFoundError : public Error
{
public:
    using Error::Error;
};

// Operation not permitted in the object's current state (e.g. answering a completed session).
class StateError : public Error
{
public:
    using Error::Error;
};

// Concurrent mutation of the same session.
class ConflictError : public Error
{
public:
    using Error::Error;
};

} // namespace uelicit

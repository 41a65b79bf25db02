#pragma once

#include <stdexcept>
#include <string>

namespace sonosim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration values that violate a type invariant.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

class GeometryInfeasible : public Error {
public:
    using Error::Error;
};

class GridOutOfBounds : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class PadTooLarge : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class KTooLarge : public Error {
public:
    using Error::Error;
};

class NTooLarge : public Error {
public:
    using Error::Error;
};

}  // namespace sonosim

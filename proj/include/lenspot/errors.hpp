#pragma once

#include <stdexcept>
#include <string>

namespace lenspot {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateGeometry : Error {
    using Error::Error;
};

struct BadPointCount : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct IgnoredInstance : Error {
    using Error::Error;
};

struct OutOfRange : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct InfeasibleMatrix : Error {
    using Error::Error;
};

struct EmptySequence : Error {
    using Error::Error;
};

struct MissingLexicon : Error {
    using Error::Error;
};

}  // namespace lenspot

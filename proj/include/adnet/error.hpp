#ifndef ADNET_ERROR_HPP
#define ADNET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace adnet {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid shapes: bad extents, mismatched operands, impossible geometry.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Out-of-range or otherwise invalid parameters (rates, config names, targets).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Dataset-level problems: degenerate polygons, empty splits, bad annotation lines.
class DataError : public Error {
public:
    using Error::Error;
};

// Filesystem / decode failures.
class IoError : public Error {
public:
    using Error::Error;
};

// Unreadable, truncated or mismatching checkpoint files.
class CheckpointError : public Error {
public:
    using Error::Error;
};

} // namespace adnet

#endif

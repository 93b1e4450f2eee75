// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace glcd {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ScheduleError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// A frame received zero total weight during fusion.
class CoverageError : public Error {
public:
    CoverageError(const std::string& what, int frame) : Error(what), frame_(frame) {}
    int frame() const noexcept { return frame_; }

private:
    int frame_;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class FilterSymmetryError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

/// A file could not be opened, created or fully written.
class IoError : public Error {
public:
    using Error::Error;
};

class DenoiserError : public Error {
public:
    using Error::Error;
};

/// Anchor K/V requested before it was captured for the current timestep.
class OrderingError : public Error {
public:
    using Error::Error;
};

}  // namespace glcd

#pragma once

#include <stdexcept>
#include <string>

namespace glovekit {

/// Base class for every error raised by the toolkit.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A MIDI note outside the C-major (white key) set was given where a white key is required.
struct BlackKeyError : Error {
    using Error::Error;
};

/// A numeric value is outside its permitted range (MIDI bytes, velocities, indices).
struct RangeError : Error {
    using Error::Error;
};

/// Malformed text input: bad header, wrong column count, non-numeric field.
struct FormatError : Error {
    using Error::Error;
};

/// Timestamps are not strictly increasing.
struct OrderError : Error {
    using Error::Error;
};

/// An operation needs at least one sensor frame.
struct EmptyStreamError : Error {
    using Error::Error;
};

/// A MIDI status byte other than note-on/note-off was given to the decoder.
struct UnsupportedStatusError : Error {
    using Error::Error;
};

/// Two note segments overlap in time; performances are monophonic.
struct OverlapError : Error {
    using Error::Error;
};

/// A note segment lies outside the sensor stream, so no pressure can be integrated.
struct EmptyWindowError : Error {
    using Error::Error;
};

/// No training sequences were supplied.
struct EmptyDataError : Error {
    using Error::Error;
};

/// A feature vector does not have the configured window length.
struct DimensionMismatchError : Error {
    using Error::Error;
};

/// No usable dev sequences were supplied to the evaluator.
struct EmptyDevError : Error {
    using Error::Error;
};

/// Unknown performance complexity tier name.
struct UnknownTierError : Error {
    using Error::Error;
};

/// Invalid pipeline configuration; message carries the offending key or parse position.
struct ConfigError : Error {
    using Error::Error;
};

/// A loaded session violates a structural invariant.
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace glovekit

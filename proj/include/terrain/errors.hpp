#pragma once

#include <stdexcept>
#include <string>

namespace terrain {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unparseable file structure (missing metadata lines, bad header row, bad JSON).
struct FormatError : Error {
    using Error::Error;
};

// Values that parse but violate data constraints (non-finite, decreasing timestamps).
struct DataError : Error {
    using Error::Error;
};

// Shape mismatches: row width, vector dimension, channel set.
struct SchemaError : Error {
    using Error::Error;
};

// Argument outside an operation's domain (empty segment, bad fraction, bad count).
struct DomainError : Error {
    using Error::Error;
};

// A label has too few windows to be split into both sides.
struct StratificationError : Error {
    using Error::Error;
};

// Training preconditions not met (too few labels, too few windows per label).
struct TrainingError : Error {
    using Error::Error;
};

// Model file carries an unsupported format_version.
struct VersionError : Error {
    using Error::Error;
};

// Model file is corrupt or its stage dimensions do not chain.
struct ModelError : Error {
    using Error::Error;
};

} // namespace terrain

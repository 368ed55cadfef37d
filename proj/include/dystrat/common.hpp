#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace dystrat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A forecaster column: maps a w-length window to an H-length forecast.
using ForecastFn = std::function<Vector(const Eigen::Ref<const Vector>&)>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A parameter outside its documented domain (non-positive counts, bad fractions, ...).
struct InvalidParameterError : Error {
    using Error::Error;
};

/// Runtime input that does not match a model/dataset contract (wrong length, shape).
struct InvalidInputError : Error {
    using Error::Error;
};

/// CSV/file ingestion failure; message carries path and row context.
struct IngestionError : Error {
    using Error::Error;
};

/// A series that cannot be normalized (fewer than two distinct values).
struct DegenerateSeriesError : Error {
    using Error::Error;
};

/// Train/eval partitioning that would leave a side empty.
struct InvalidSplitError : Error {
    using Error::Error;
};

/// Non-finite loss encountered while fitting; message names the epoch.
struct DivergenceError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace dystrat

#pragma once

#include <stdexcept>
#include <string>

namespace stitchsmc {

// Failure of the inference run itself (degenerate weights, unreachable roads,
// dead ends) as opposed to misuse of the API or malformed input. The CLI maps
// these to exit code 3.
class ModelRuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every candidate in a normalisation step carries zero probability mass.
// time_index / particle_index are -1 when unknown.
class AllWeightsZeroError : public ModelRuntimeError {
public:
    explicit AllWeightsZeroError(const std::string& what, long time_index = -1,
                                 long particle_index = -1)
        : ModelRuntimeError(what), time_index(time_index), particle_index(particle_index) {}

    long time_index;
    long particle_index;
};

// Rejection sampling was requested (max_rejections > 0) on a model that does
// not expose a transition density bound.
class MissingBoundError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// An exact enumeration would exceed its configured size cap.
class TooLargeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input document (network file, trace file, config). Exit code 2.
class SchemaError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DanglingReferenceError : public SchemaError {
public:
    using SchemaError::SchemaError;
};

class ZeroLengthEdgeError : public SchemaError {
public:
    using SchemaError::SchemaError;
};

class GeometryMismatchError : public SchemaError {
public:
    using SchemaError::SchemaError;
};

class OffsetOutOfRangeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Route enumeration hit the configured expansion cap; the caller's d_max or
// network is unsuitable rather than the data being bad mid-run.
class ExplosionGuardError : public ModelRuntimeError {
public:
    using ModelRuntimeError::ModelRuntimeError;
};

class NoRoadNearbyError : public ModelRuntimeError {
public:
    using ModelRuntimeError::ModelRuntimeError;
};

class DeadEndError : public ModelRuntimeError {
public:
    using ModelRuntimeError::ModelRuntimeError;
};

class DisconnectedError : public ModelRuntimeError {
public:
    using ModelRuntimeError::ModelRuntimeError;
};

// A route does not start at the state it is being evaluated from.
class RouteMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class EmptySampleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace stitchsmc

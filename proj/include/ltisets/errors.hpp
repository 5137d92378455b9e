#pragma once

#include <stdexcept>
#include <string>

namespace ltisets {

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidMatrix : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IllFormed : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotPSD : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPD : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Unbounded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MaxIterationsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CertificateInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyUnion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when two independent solution routes disagree beyond tolerance.
struct SolverDiagnostic : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ltisets

#pragma once

#include <stdexcept>
#include <string>

namespace singletrack {

/// How a failure should be classified by front ends (exit codes, logging).
enum class ErrorKind {
    Input,      // bad files, bad config, inconsistent data
    Numerical,  // model/filter failures on otherwise valid data
};

struct Error : std::runtime_error {
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

struct NonPositiveParameter : Error {
    explicit NonPositiveParameter(const std::string& field)
        : Error(ErrorKind::Input, "parameter must be strictly positive: " + field),
          name(field) {}
    std::string name;
};

struct ParseError : Error {
    explicit ParseError(const std::string& location)
        : Error(ErrorKind::Input, "parse error: " + location) {}
};

struct InvalidValue : Error {
    explicit InvalidValue(const std::string& what)
        : Error(ErrorKind::Input, "invalid value: " + what) {}
};

struct SpeedTooLow : Error {
    SpeedTooLow(double speed, double v_min)
        : Error(ErrorKind::Numerical,
                "speed " + std::to_string(speed) + " m/s below v_min " +
                    std::to_string(v_min) + "; dynamic model is singular near standstill") {}
};

struct SingularDenominator : Error {
    explicit SingularDenominator(const std::string& which)
        : Error(ErrorKind::Numerical, "discrete model denominator near zero: " + which) {}
};

struct SingularInnovationCovariance : Error {
    SingularInnovationCovariance()
        : Error(ErrorKind::Numerical, "innovation covariance H P H^T + R is numerically singular") {}
};

struct InconsistentLoads : Error {
    InconsistentLoads(double sum, double weight)
        : Error(ErrorKind::Input,
                "axle loads sum " + std::to_string(sum) + " N inconsistent with weight " +
                    std::to_string(weight) + " N") {}
};

struct TooFewCycles : Error {
    TooFewCycles() : Error(ErrorKind::Input, "need at least 2 cycle timestamps") {}
};

struct TooFewSamples : Error {
    explicit TooFewSamples(const std::string& what)
        : Error(ErrorKind::Input, "too few samples: " + what) {}
};

struct DegenerateMarkers : Error {
    explicit DegenerateMarkers(double t)
        : Error(ErrorKind::Input,
                "front and rear markers coincide at t=" + std::to_string(t)) {}
};

struct NoSteadyWindow : Error {
    NoSteadyWindow()
        : Error(ErrorKind::Numerical, "no steady-state window found in yaw-rate signal") {}
};

struct SlipTooSmall : Error {
    explicit SlipTooSmall(const std::string& axle)
        : Error(ErrorKind::Numerical,
                "slip angle too small to identify cornering stiffness (" + axle + " axle)") {}
};

struct GridMismatch : Error {
    explicit GridMismatch(const std::string& what)
        : Error(ErrorKind::Input, "time grid mismatch: " + what) {}
};

struct EmptyTrajectory : Error {
    EmptyTrajectory() : Error(ErrorKind::Input, "trajectory needs at least 2 poses") {}
};

struct ZeroPath : Error {
    ZeroPath() : Error(ErrorKind::Input, "trajectory has zero path length") {}
};

}  // namespace singletrack

#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Core>

namespace c3bf {

using Vec2 = Eigen::Vector2d;

/// Two-component input. Unicycle: (a, alpha). Bicycle: (a, beta). Point mass: (a_x, a_y).
using ControlInput = Eigen::Vector2d;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ModelKind { Unicycle, Bicycle, PointMass };
enum class CbfKind { C3bf, Ellipse, Hocbf, None };

struct UnicycleState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double v = 0.0;
    double omega = 0.0;
};

struct BicycleState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double v = 0.0;
};

struct PointMassState {
    Vec2 p = Vec2::Zero();
    Vec2 v = Vec2::Zero();
};

using VehicleState = std::variant<UnicycleState, BicycleState, PointMassState>;

struct ModelParams {
    double l = 0.0;         // body-center offset from the drive axis (unicycle)
    double lf = 1.0;        // CoM to front axle
    double lr = 1.0;        // CoM to rear axle
    double w = 0.0;         // vehicle width
    double beta_max = 0.2;  // slip-angle cap
    double v_max = kInf;

    void validate() const;
};

/// Input or configuration rejected before any computation ran.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A closed-loop run that could not continue.
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Requested barrier/model combination has no valid construction.
class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ModelKind model_kind(const VehicleState& s);

const char* to_string(ModelKind m);
const char* to_string(CbfKind k);
ModelKind parse_model_kind(const std::string& s);
CbfKind parse_cbf_kind(const std::string& s);

}  // namespace c3bf

#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "c3bf/types.hpp"

namespace c3bf {

using Vector5d = Eigen::Matrix<double, 5, 1>;

/// Wraps an angle to (-pi, pi].
double normalize_angle(double a);

/// Acceleration-controlled unicycle: (v cos th, v sin th, omega, a, alpha).
Vector5d unicycle_derivative(const UnicycleState& s, const ControlInput& u);

/// Small-slip kinematic bicycle written as f(x) + g(x) u with u = (a, beta).
/// Throws ValidationError when |beta| exceeds params.beta_max.
Eigen::Vector4d bicycle_derivative(const BicycleState& s, const ControlInput& u, const ModelParams& params);

/// Maps a front steering angle to the slip angle at the center of mass.
double slip_from_steering(double delta, const ModelParams& params);

/// Planar double integrator: (v, u).
Eigen::Vector4d pointmass_derivative(const PointMassState& s, const ControlInput& u);

/// Flat state vector in the model's native ordering.
Eigen::VectorXd to_vector(const VehicleState& s);
VehicleState from_vector(ModelKind kind, const Eigen::Ref<const Eigen::VectorXd>& x);
int state_dimension(ModelKind kind);

/// State derivative of any model; dispatches on the variant.
Eigen::VectorXd derivative(const VehicleState& s, const ControlInput& u, const ModelParams& params);

/// Classical RK4 step with the input held over [t, t + dt]. Heading is renormalized.
/// Throws SimulationError(step = 0) when the result is not finite; callers rethrow with
/// their own step index.
VehicleState integrate_step(const VehicleState& s, const ControlInput& u, const ModelParams& params, double dt);

bool is_finite(const VehicleState& s);

/// Heading of the vehicle. For the point mass this is the direction of its velocity
/// (0 when at rest).
double heading(const VehicleState& s);

/// Signed forward speed. For the point mass, speed is signed by the velocity's
/// projection on `reference_heading`.
double forward_speed(const VehicleState& s, double reference_heading = 0.0);

Vec2 position(const VehicleState& s);

}  // namespace c3bf

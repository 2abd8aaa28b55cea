#pragma once

#include <optional>
#include <vector>

#include "c3bf/types.hpp"

namespace c3bf {

struct PGains {
    double k1 = 1.0;     // speed gain
    double k2 = 1.0;     // yaw-rate damping
    double v_des = 1.0;  // target speed

    void validate(double v_max) const;
};

/// Piecewise-linear reference path.
class ReferencePath {
public:
    struct Projection {
        Vec2 point;
        std::size_t segment = 0;
        double path_heading = 0.0;
        double lateral = 0.0;  // signed distance, positive when the query is left of the path
    };

    ReferencePath() = default;
    /// Throws ValidationError unless there are >= 2 waypoints and no two consecutive
    /// waypoints coincide.
    ReferencePath(std::vector<Vec2> waypoints, bool closed);

    const std::vector<Vec2>& waypoints() const noexcept { return waypoints_; }
    bool closed() const noexcept { return closed_; }
    bool empty() const noexcept { return waypoints_.empty(); }

    /// Nearest point by segment-wise projection.
    Projection project(const Vec2& q) const;

private:
    std::vector<Vec2> waypoints_;
    bool closed_ = false;
};

struct StanleyGains {
    double k_e = 1.0;        // cross-track gain
    double v_floor = 0.5;    // speed floor inside the arctan term
    double max_steer = 0.6;  // front steering clamp (rad), must be < pi/2
};

/// (a, alpha) = (k1 (v_des - v), -k2 omega).
ControlInput p_controller(const UnicycleState& s, const PGains& g);

/// k1 (v_des - v), clamped to +-accel_limit when one is given.
double p_speed_bicycle(const BicycleState& s, const PGains& g, std::optional<double> accel_limit = {});

/// Stanley lateral law evaluated at the front axle, mapped to a slip angle and clamped to
/// +-beta_max. Positive beta turns left.
double stanley_lateral(const BicycleState& s, const ReferencePath& path, const StanleyGains& gains,
                       const ModelParams& params);

/// Point-mass reference: track the velocity v_des (cos psi, sin psi) with gain k1.
ControlInput pointmass_velocity_tracker(const PointMassState& s, const PGains& g, double heading_des);

}  // namespace c3bf

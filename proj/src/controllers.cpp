#include "c3bf/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "c3bf/vehicle_models.hpp"

namespace c3bf {

void PGains::validate(double v_max) const
{
    if (!(k1 > 0.0 && std::isfinite(k1))) throw ValidationError("controller: k1 must be > 0");
    if (!(k2 >= 0.0 && std::isfinite(k2))) throw ValidationError("controller: k2 must be >= 0");
    if (!(std::isfinite(v_des) && std::abs(v_des) <= v_max))
        throw ValidationError("controller: |v_des| must not exceed v_max");
}

ReferencePath::ReferencePath(std::vector<Vec2> waypoints, bool closed)
    : waypoints_(std::move(waypoints)), closed_(closed)
{
    if (waypoints_.size() < 2) throw ValidationError("path: at least two waypoints are required");
    for (std::size_t i = 0; i < waypoints_.size(); ++i) {
        if (!waypoints_[i].allFinite()) throw ValidationError("path: waypoint " + std::to_string(i) + " is not finite");
        if (i > 0 && (waypoints_[i] - waypoints_[i - 1]).norm() == 0.0)
            throw ValidationError("path: waypoints " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                  " coincide");
    }
}

ReferencePath::Projection ReferencePath::project(const Vec2& q) const
{
    if (waypoints_.size() < 2) throw ValidationError("path: empty reference path");
    const std::size_t n_seg = closed_ ? waypoints_.size() : waypoints_.size() - 1;
    Projection best;
    double best_d2 = kInf;
    for (std::size_t i = 0; i < n_seg; ++i) {
        const Vec2& a = waypoints_[i];
        const Vec2& b = waypoints_[(i + 1) % waypoints_.size()];
        const Vec2 ab = b - a;
        if (ab.squaredNorm() == 0.0) continue;  // closing segment onto a repeated start point
        const double t = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        const Vec2 foot = a + t * ab;
        const double d2 = (q - foot).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best.point = foot;
            best.segment = i;
            best.path_heading = std::atan2(ab.y(), ab.x());
            const Vec2 dir = ab.normalized();
            best.lateral = dir.x() * (q - a).y() - dir.y() * (q - a).x();
        }
    }
    return best;
}

ControlInput p_controller(const UnicycleState& s, const PGains& g)
{
    return {g.k1 * (g.v_des - s.v), -g.k2 * s.omega};
}

double p_speed_bicycle(const BicycleState& s, const PGains& g, std::optional<double> accel_limit)
{
    double a = g.k1 * (g.v_des - s.v);
    if (accel_limit) a = std::clamp(a, -*accel_limit, *accel_limit);
    return a;
}

double stanley_lateral(const BicycleState& s, const ReferencePath& path, const StanleyGains& gains,
                       const ModelParams& params)
{
    if (path.empty()) throw ValidationError("stanley_lateral: empty reference path");
    const Vec2 front(s.x + params.lf * std::cos(s.theta), s.y + params.lf * std::sin(s.theta));
    const auto proj = path.project(front);
    const double heading_error = normalize_angle(proj.path_heading - s.theta);
    const double cross = std::atan(gains.k_e * proj.lateral / std::max(std::abs(s.v), gains.v_floor));
    const double limit = std::min(gains.max_steer, std::numbers::pi / 2.0 - 1e-6);
    const double delta = std::clamp(heading_error - cross, -limit, limit);
    return std::clamp(slip_from_steering(delta, params), -params.beta_max, params.beta_max);
}

ControlInput pointmass_velocity_tracker(const PointMassState& s, const PGains& g, double heading_des)
{
    const Vec2 target = g.v_des * Vec2(std::cos(heading_des), std::sin(heading_des));
    return g.k1 * (target - s.v);
}

}  // namespace c3bf

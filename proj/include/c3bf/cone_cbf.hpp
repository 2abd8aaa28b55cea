#pragma once

#include "c3bf/types.hpp"

namespace c3bf {

/// Elliptical obstacle with axis-aligned semi-axes. The center moves with a velocity that
/// is constant between scenario-declared switch times.
struct Obstacle {
    Vec2 center = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();
    double c1 = 1.0;  // semi-axis along x
    double c2 = 1.0;  // semi-axis along y

    void validate() const;
};

struct RelativeKinematics {
    Vec2 p_rel;
    Vec2 v_rel;
};

struct ConeGeometry {
    double r = 0.0;
    Vec2 p_rel = Vec2::Zero();
    Vec2 v_rel = Vec2::Zero();
    double dist = 0.0;
    double cos_phi = 0.0;
    bool penetration = false;
};

/// h together with its Lie derivatives along the extended (vehicle + obstacle center)
/// dynamics, so that dh/dt = lfh + lgh . u.
struct CbfEvaluation {
    double h = 0.0;
    double lfh = 0.0;
    Vec2 lgh = Vec2::Zero();
    bool penetration = false;
};

/// Radius of the bounding circle that covers the ellipse inflated by half the vehicle width.
double effective_radius(const Obstacle& o, const ModelParams& params);

/// Relative position/velocity of the obstacle with respect to the unicycle body center,
/// which sits a distance l ahead of the drive axis.
RelativeKinematics rel_kinematics_unicycle(const UnicycleState& s, const Obstacle& o, const ModelParams& params);

/// Bicycle variant. v_rel uses the body-axis velocity v(cos th, sin th) only, i.e. it is
/// not the derivative of p_rel once beta != 0.
RelativeKinematics rel_kinematics_bicycle(const BicycleState& s, const Obstacle& o);

RelativeKinematics rel_kinematics_pointmass(const PointMassState& s, const Obstacle& o);

RelativeKinematics rel_kinematics(const VehicleState& s, const Obstacle& o, const ModelParams& params);

/// Builds the cone. Inside the bounding circle cos_phi is clamped to 0 and the
/// penetration flag is raised.
ConeGeometry cone_geometry(const Vec2& p_rel, const Vec2& v_rel, double r);

/// <p_rel, v_rel> + |p_rel| |v_rel| cos(phi). Non-negative iff v_rel points outside the
/// collision cone.
double c3bf_value(const Vec2& p_rel, const Vec2& v_rel, double r);

/// Collision-cone barrier with analytic Lie derivatives for all three models.
CbfEvaluation c3bf_eval(const VehicleState& s, const Obstacle& o, const ModelParams& params);

/// Ellipse level-set barrier ((cx-x)/c1)^2 + ((cy-y)/c2)^2 - 1 with its Lie derivatives.
/// For the acceleration-controlled unicycle and the point mass lgh is identically zero.
CbfEvaluation ellipse_cbf_eval(const VehicleState& s, const Obstacle& o, const ModelParams& params);

/// Second-order barrier h2 = dh1/dt + gamma1 h1 built on the ellipse barrier h1.
/// Bicycle with a moving obstacle throws UnsupportedError. For the static-obstacle bicycle
/// the input-free part of dh1/dt is used (see docs/scenario_format.md).
CbfEvaluation hocbf_eval(const VehicleState& s, const Obstacle& o, const ModelParams& params, double gamma1);

/// Dispatch on the barrier kind. CbfKind::None evaluates the collision-cone barrier so
/// runs without a filter still log comparable h values.
CbfEvaluation evaluate_cbf(CbfKind kind, const VehicleState& s, const Obstacle& o, const ModelParams& params,
                           double hocbf_gamma1);

}  // namespace c3bf

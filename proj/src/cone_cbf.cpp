#include "c3bf/cone_cbf.hpp"

#include <algorithm>
#include <cmath>

#include "c3bf/vehicle_models.hpp"

namespace c3bf {

namespace {

// Below this relative speed the |v_rel| term is treated as non-differentiable and its
// gradient contribution is dropped (the symmetric-difference limit).
constexpr double kSpeedEps = 1e-12;

// Time derivatives of (p_rel, v_rel) split into drift and the two input columns.
struct RelativeFlow {
    Vec2 dp_f = Vec2::Zero();
    Vec2 dv_f = Vec2::Zero();
    Eigen::Matrix2d dp_g = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d dv_g = Eigen::Matrix2d::Zero();
};

RelativeFlow relative_flow(const UnicycleState& s, const RelativeKinematics& k, const ModelParams& params)
{
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    const double l = params.l;
    RelativeFlow f;
    f.dp_f = k.v_rel;
    f.dv_f << s.v * s.omega * sn + l * s.omega * s.omega * c, -s.v * s.omega * c + l * s.omega * s.omega * sn;
    f.dv_g << -c, l * sn,
              -sn, -l * c;
    return f;
}

RelativeFlow relative_flow(const BicycleState& s, const RelativeKinematics& k, const ModelParams& params)
{
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    RelativeFlow f;
    f.dp_f = k.v_rel;
    f.dp_g << 0.0, s.v * sn,
              0.0, -s.v * c;
    const double turn = s.v * s.v / params.lr;
    f.dv_g << -c, turn * sn,
              -sn, -turn * c;
    return f;
}

RelativeFlow relative_flow(const PointMassState&, const RelativeKinematics& k, const ModelParams&)
{
    RelativeFlow f;
    f.dp_f = k.v_rel;
    f.dv_g = -Eigen::Matrix2d::Identity();
    return f;
}

// Ellipse gradient with respect to the center offset (cx - x, cy - y).
Vec2 ellipse_gradient(const Vec2& d, const Obstacle& o)
{
    return {2.0 * d.x() / (o.c1 * o.c1), 2.0 * d.y() / (o.c2 * o.c2)};
}

double ellipse_value(const Vec2& d, const Obstacle& o)
{
    const double a = d.x() / o.c1;
    const double b = d.y() / o.c2;
    return a * a + b * b - 1.0;
}

double weighted_square(const Vec2& q, const Obstacle& o)
{
    return 2.0 * q.x() * q.x() / (o.c1 * o.c1) + 2.0 * q.y() * q.y() / (o.c2 * o.c2);
}

}  // namespace

void Obstacle::validate() const
{
    if (!(c1 > 0.0 && c2 > 0.0 && std::isfinite(c1) && std::isfinite(c2)))
        throw ValidationError("obstacle: semi-axes c1, c2 must be finite and > 0");
    if (!center.allFinite()) throw ValidationError("obstacle: center must be finite");
    if (!velocity.allFinite()) throw ValidationError("obstacle: velocity must be finite");
}

double effective_radius(const Obstacle& o, const ModelParams& params)
{
    return std::max(o.c1, o.c2) + params.w / 2.0;
}

RelativeKinematics rel_kinematics_unicycle(const UnicycleState& s, const Obstacle& o, const ModelParams& params)
{
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    const double l = params.l;
    RelativeKinematics k;
    k.p_rel = o.center - Vec2(s.x + l * c, s.y + l * sn);
    k.v_rel = o.velocity - Vec2(s.v * c - l * sn * s.omega, s.v * sn + l * c * s.omega);
    return k;
}

RelativeKinematics rel_kinematics_bicycle(const BicycleState& s, const Obstacle& o)
{
    RelativeKinematics k;
    k.p_rel = o.center - Vec2(s.x, s.y);
    k.v_rel = o.velocity - s.v * Vec2(std::cos(s.theta), std::sin(s.theta));
    return k;
}

RelativeKinematics rel_kinematics_pointmass(const PointMassState& s, const Obstacle& o)
{
    return {o.center - s.p, o.velocity - s.v};
}

RelativeKinematics rel_kinematics(const VehicleState& s, const Obstacle& o, const ModelParams& params)
{
    if (const auto* u = std::get_if<UnicycleState>(&s)) return rel_kinematics_unicycle(*u, o, params);
    if (const auto* b = std::get_if<BicycleState>(&s)) return rel_kinematics_bicycle(*b, o);
    return rel_kinematics_pointmass(std::get<PointMassState>(s), o);
}

ConeGeometry cone_geometry(const Vec2& p_rel, const Vec2& v_rel, double r)
{
    ConeGeometry g;
    g.r = r;
    g.p_rel = p_rel;
    g.v_rel = v_rel;
    g.dist = p_rel.norm();
    if (g.dist > r) {
        g.cos_phi = std::sqrt(g.dist * g.dist - r * r) / g.dist;
    } else {
        g.cos_phi = 0.0;
        g.penetration = true;
    }
    return g;
}

double c3bf_value(const Vec2& p_rel, const Vec2& v_rel, double r)
{
    const ConeGeometry g = cone_geometry(p_rel, v_rel, r);
    return p_rel.dot(v_rel) + g.dist * v_rel.norm() * g.cos_phi;
}

CbfEvaluation c3bf_eval(const VehicleState& s, const Obstacle& o, const ModelParams& params)
{
    const double r = effective_radius(o, params);
    const RelativeKinematics k = rel_kinematics(s, o, params);
    const ConeGeometry g = cone_geometry(k.p_rel, k.v_rel, r);

    // |p| cos(phi) = sqrt(|p|^2 - r^2), so h = <p, v> + |v| root.
    const double root = g.dist * g.cos_phi;
    const double speed = k.v_rel.norm();

    CbfEvaluation e;
    e.penetration = g.penetration;
    e.h = k.p_rel.dot(k.v_rel) + speed * root;

    Vec2 dh_dp = k.v_rel;
    if (!g.penetration && root > 0.0) dh_dp += (speed / root) * k.p_rel;
    Vec2 dh_dv = k.p_rel;
    if (speed > kSpeedEps) dh_dv += (root / speed) * k.v_rel;

    const RelativeFlow f = std::visit([&](const auto& st) { return relative_flow(st, k, params); }, s);
    e.lfh = dh_dp.dot(f.dp_f) + dh_dv.dot(f.dv_f);
    e.lgh = f.dp_g.transpose() * dh_dp + f.dv_g.transpose() * dh_dv;
    return e;
}

CbfEvaluation ellipse_cbf_eval(const VehicleState& s, const Obstacle& o, const ModelParams&)
{
    const Vec2 d = o.center - position(s);
    const Vec2 grad = ellipse_gradient(d, o);
    CbfEvaluation e;
    e.h = ellipse_value(d, o);
    e.penetration = e.h < 0.0;

    if (const auto* u = std::get_if<UnicycleState>(&s)) {
        const Vec2 heading(std::cos(u->theta), std::sin(u->theta));
        e.lfh = grad.dot(o.velocity - u->v * heading);
    } else if (const auto* b = std::get_if<BicycleState>(&s)) {
        const double c = std::cos(b->theta);
        const double sn = std::sin(b->theta);
        e.lfh = grad.dot(o.velocity - b->v * Vec2(c, sn));
        e.lgh = Vec2(0.0, grad.dot(b->v * Vec2(sn, -c)));
    } else {
        const auto& pm = std::get<PointMassState>(s);
        e.lfh = grad.dot(o.velocity - pm.v);
    }
    return e;
}

CbfEvaluation hocbf_eval(const VehicleState& s, const Obstacle& o, const ModelParams& params, double gamma1)
{
    if (!(gamma1 > 0.0)) throw ValidationError("hocbf_eval: gamma1 must be > 0");
    const Vec2 d = o.center - position(s);
    const Vec2 grad = ellipse_gradient(d, o);
    const double h1 = ellipse_value(d, o);

    CbfEvaluation e;
    e.penetration = h1 < 0.0;

    if (const auto* u = std::get_if<UnicycleState>(&s)) {
        const Vec2 heading(std::cos(u->theta), std::sin(u->theta));
        const Vec2 normal(-heading.y(), heading.x());
        const Vec2 q = o.velocity - u->v * heading;  // d/dt of the center offset
        const double h1dot = grad.dot(q);
        e.h = h1dot + gamma1 * h1;
        e.lfh = weighted_square(q, o) + grad.dot(-u->v * u->omega * normal) + gamma1 * h1dot;
        e.lgh = Vec2(-grad.dot(heading), 0.0);
    } else if (const auto* pm = std::get_if<PointMassState>(&s)) {
        const Vec2 q = o.velocity - pm->v;
        const double h1dot = grad.dot(q);
        e.h = h1dot + gamma1 * h1;
        e.lfh = weighted_square(q, o) + gamma1 * h1dot;
        e.lgh = -grad;
    } else {
        const auto& b = std::get<BicycleState>(s);
        if (o.velocity.squaredNorm() > 0.0)
            throw UnsupportedError("hocbf_eval: bicycle with a moving obstacle has no valid second-order barrier");
        const Vec2 heading(std::cos(b.theta), std::sin(b.theta));
        const Vec2 normal(-heading.y(), heading.x());
        const Vec2 q = -b.v * heading;  // beta-free part of the offset rate
        const double lf_h1 = grad.dot(q);
        e.h = lf_h1 + gamma1 * h1;
        const Vec2 wq(2.0 * q.x() / (o.c1 * o.c1), 2.0 * q.y() / (o.c2 * o.c2));
        e.lfh = weighted_square(q, o) + gamma1 * lf_h1;
        e.lgh = Vec2(-grad.dot(heading),
                     -b.v * wq.dot(normal) - (b.v * b.v / params.lr) * grad.dot(normal) - gamma1 * b.v * grad.dot(normal));
    }
    return e;
}

CbfEvaluation evaluate_cbf(CbfKind kind, const VehicleState& s, const Obstacle& o, const ModelParams& params,
                           double hocbf_gamma1)
{
    switch (kind) {
    case CbfKind::Ellipse: return ellipse_cbf_eval(s, o, params);
    case CbfKind::Hocbf: return hocbf_eval(s, o, params, hocbf_gamma1);
    case CbfKind::C3bf:
    case CbfKind::None: break;
    }
    return c3bf_eval(s, o, params);
}

}  // namespace c3bf

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "c3bf/cone_cbf.hpp"
#include "oracles.hpp"

using namespace c3bf;
using doctest::Approx;

namespace {

Obstacle circle(Vec2 c, double radius, Vec2 vel = Vec2::Zero())
{
    Obstacle o;
    o.center = c;
    o.velocity = vel;
    o.c1 = o.c2 = radius;
    return o;
}

}  // namespace

TEST_CASE("effective radius")
{
    ModelParams p;
    p.w = 0.0;
    CHECK(effective_radius(circle({0, 0}, 1.0), p) == 1.0);
    Obstacle o;
    o.c1 = 1.0;
    o.c2 = 0.5;
    p.w = 0.8;
    CHECK(effective_radius(o, p) == Approx(1.4));
    std::swap(o.c1, o.c2);
    CHECK(effective_radius(o, p) == Approx(1.4));
}

TEST_CASE("obstacle validation")
{
    Obstacle o = circle({0, 0}, 1.0);
    CHECK_NOTHROW(o.validate());
    o.c2 = 0.0;
    CHECK_THROWS_AS(o.validate(), ValidationError);
    o.c2 = 1.0;
    o.velocity.x() = NAN;
    CHECK_THROWS_AS(o.validate(), ValidationError);
}

TEST_CASE("relative kinematics examples")
{
    ModelParams p;
    auto k = rel_kinematics_unicycle({0, 0, 0, 1, 0}, circle({5, 0}, 1), p);
    CHECK(k.p_rel.isApprox(Vec2(5, 0)));
    CHECK(k.v_rel.isApprox(Vec2(-1, 0)));

    p.l = 1.0;
    k = rel_kinematics_unicycle({0, 0, 0, 0, 1}, circle({0, 5}, 1), p);
    CHECK((k.p_rel - Vec2(-1, 5)).norm() <= 1e-15);
    CHECK((k.v_rel - Vec2(0, -1)).norm() <= 1e-15);

    p.l = 0.0;
    k = rel_kinematics_unicycle({2, 3, 1.0, 0, 0}, circle({5, 0}, 1, {0.3, -0.7}), p);
    CHECK(k.v_rel.isApprox(Vec2(0.3, -0.7)));

    k = rel_kinematics_bicycle({0, 0, 0, 1}, circle({5, 0}, 1));
    CHECK(k.p_rel.isApprox(Vec2(5, 0)));
    CHECK(k.v_rel.isApprox(Vec2(-1, 0)));
    k = rel_kinematics_bicycle({1, 1, std::numbers::pi / 2, 2}, circle({1, 6}, 1, {1, 0}));
    CHECK((k.p_rel - Vec2(0, 5)).norm() <= 1e-15);
    CHECK((k.v_rel - Vec2(1, -2)).norm() <= 1e-15);
    k = rel_kinematics_bicycle({1, 1, 0.4, 0}, circle({1, 6}, 1, {1, 0.5}));
    CHECK(k.v_rel.isApprox(Vec2(1, 0.5)));
}

TEST_CASE("cone value examples")
{
    CHECK(c3bf_value({5, 0}, {0, 0}, 3) == 0.0);
    CHECK(c3bf_value({5, 0}, {-1, 0}, 3) == Approx(-1.0).epsilon(1e-14));
    CHECK(c3bf_value({5, 0}, {1, 0}, 3) == Approx(9.0).epsilon(1e-14));
    const Vec2 v(-1.0, 0.3);
    const Vec2 p(3.0 + 1e-9, 0.0);
    CHECK(c3bf_value(p, v, 3.0) == Approx(p.dot(v)).epsilon(1e-4));
    CHECK(c3bf_value(p, v, 3.0) < 0.0);
}

TEST_CASE("penetration clamps the half angle")
{
    const ConeGeometry g = cone_geometry({1, 0}, {-1, 0}, 2.0);
    CHECK(g.penetration);
    CHECK(g.cos_phi == 0.0);
    CHECK(c3bf_value({1, 0}, {-1, 0}, 2.0) == Approx(-1.0));
    const ConeGeometry outside = cone_geometry({5, 0}, {-1, 0}, 3.0);
    CHECK_FALSE(outside.penetration);
    CHECK(outside.cos_phi == Approx(0.8));

    ModelParams p;
    const CbfEvaluation e = c3bf_eval(UnicycleState{0, 0, 0, 1, 0}, circle({0.5, 0}, 1), p);
    CHECK(e.penetration);
    CHECK(std::isfinite(e.h));
    CHECK(std::isfinite(e.lfh));
    CHECK(e.lgh.allFinite());
}

TEST_CASE("cone membership matches the direct angle test")
{
    test::Rng rng(5);
    int checked = 0;
    for (int i = 0; i < 20000; ++i) {
        const double r = rng.uniform(0.2, 3.0);
        const Vec2 p = rng.uniform(r + 0.01, r + 10) * rng.direction();
        const Vec2 v = rng.uniform(0.01, 4) * rng.direction();
        const double angle = std::acos(std::clamp(p.dot(v) / (p.norm() * v.norm()), -1.0, 1.0));
        const double phi = std::asin(r / p.norm());
        const double margin = angle - (std::numbers::pi - phi);
        if (std::abs(margin) < 1e-9) continue;
        CHECK((c3bf_value(p, v, r) >= 0.0) == (margin <= 0.0));
        ++checked;
    }
    CHECK(checked > 19000);
}

TEST_CASE("cone value is homogeneous in the relative velocity")
{
    test::Rng rng(6);
    for (int i = 0; i < 1000; ++i) {
        const double r = rng.uniform(0.2, 3.0);
        const Vec2 p = rng.uniform(r + 0.01, r + 10) * rng.direction();
        const Vec2 v = rng.vec(-3, 3);
        const double lambda = rng.uniform(0.01, 20);
        const double h = c3bf_value(p, v, r);
        CHECK(c3bf_value(p, lambda * v, r) == Approx(lambda * h).epsilon(1e-12).scale(1e-12));
    }
}

TEST_CASE("analytic Lie derivatives match the central difference along the flow")
{
    test::Rng rng(7);
    for (ModelKind kind : {ModelKind::Unicycle, ModelKind::Bicycle, ModelKind::PointMass}) {
        CAPTURE(to_string(kind));
        for (int i = 0; i < 300; ++i) {
            const ModelParams p = test::random_params(kind, rng);
            const VehicleState s = test::random_state(kind, rng);
            const Obstacle o = test::random_obstacle_near(s, p, rng, 0.2);
            const ControlInput u = test::random_input(kind, p, rng);
            const CbfEvaluation e = c3bf_eval(s, o, p);
            const RelativeKinematics k = rel_kinematics(s, o, p);
            if (k.v_rel.norm() < 1e-3) continue;
            const double fd = test::fd_c3bf_rate(s, o, p, u);
            CHECK(std::abs(e.lfh + e.lgh.dot(u) - fd) <= 1e-6 * (1 + std::abs(fd)));
            CHECK(e.h == Approx(c3bf_value(k.p_rel, k.v_rel, effective_radius(o, p))).epsilon(1e-14));
        }
    }
}

TEST_CASE("head-on example: rate under zero input")
{
    ModelParams p;
    p.w = 0.0;
    const UnicycleState s{0, 0, 0, 1, 0};
    const Obstacle o = circle({5, 0}, 3.0);
    const CbfEvaluation e = c3bf_eval(s, o, p);
    CHECK(e.h == Approx(-1.0));
    const double fd = test::fd_c3bf_rate(s, o, p, {0, 0});
    CHECK(std::abs(e.lfh - fd) <= 1e-6 * (1 + std::abs(fd)));
}

TEST_CASE("zero relative velocity: h vanishes, input still acts")
{
    ModelParams p;
    const CbfEvaluation e = c3bf_eval(UnicycleState{0, 0, 0.3, 0, 0}, circle({4, 1}, 1), p);
    CHECK(e.h == 0.0);
    CHECK(e.lgh.norm() > 0.1);
    // Pushing toward the obstacle lowers h, pulling away raises it.
    CHECK(e.lgh.x() < 0.0);
}

TEST_CASE("ellipse barrier")
{
    test::Rng rng(8);
    const ModelParams p;
    Obstacle o;
    o.center = {2, 1};
    o.c1 = 2.0;
    o.c2 = 0.5;
    CHECK(ellipse_cbf_eval(UnicycleState{4, 1, 0, 1, 0}, o, p).h == Approx(0.0).scale(1));
    CHECK(ellipse_cbf_eval(PointMassState{Vec2(2, 1.5), Vec2::Zero()}, o, p).h == Approx(0.0).scale(1));

    for (ModelKind kind : {ModelKind::Unicycle, ModelKind::Bicycle, ModelKind::PointMass}) {
        CAPTURE(to_string(kind));
        for (int i = 0; i < 300; ++i) {
            const ModelParams q = test::random_params(kind, rng);
            const VehicleState s = test::random_state(kind, rng);
            const Obstacle ob = test::random_obstacle_near(s, q, rng, 0.2);
            const ControlInput u = test::random_input(kind, q, rng);
            const CbfEvaluation e = ellipse_cbf_eval(s, ob, q);
            const double fd = test::fd_rate(
                [&](const VehicleState& x, const Obstacle& c) { return ellipse_cbf_eval(x, c, q); }, s, ob, q, u);
            CHECK(std::abs(e.lfh + e.lgh.dot(u) - fd) <= 1e-6 * (1 + std::abs(fd)));
            if (kind != ModelKind::Bicycle) CHECK(e.lgh.norm() == 0.0);
            else CHECK(e.lgh.x() == 0.0);
        }
    }
}

TEST_CASE("ellipse and cone disagree on a head-on approach")
{
    ModelParams p;
    const Obstacle o = circle({6, 0}, 1.0);
    const UnicycleState s{0, 0, 0, 2, 0};
    CHECK(ellipse_cbf_eval(s, o, p).h > 0.0);
    CHECK(c3bf_eval(s, o, p).h < 0.0);
}

TEST_CASE("second-order barrier")
{
    test::Rng rng(9);
    for (ModelKind kind : {ModelKind::Unicycle, ModelKind::PointMass}) {
        CAPTURE(to_string(kind));
        for (int i = 0; i < 300; ++i) {
            const ModelParams p = test::random_params(kind, rng);
            const VehicleState s = test::random_state(kind, rng);
            const Obstacle o = test::random_obstacle_near(s, p, rng, 0.2, kind == ModelKind::PointMass);
            const ControlInput u = test::random_input(kind, p, rng);
            const double g1 = rng.uniform(0.2, 3);
            const CbfEvaluation e = hocbf_eval(s, o, p, g1);
            const double fd = test::fd_rate(
                [&](const VehicleState& x, const Obstacle& c) { return hocbf_eval(x, c, p, g1); }, s, o, p, u);
            CHECK(std::abs(e.lfh + e.lgh.dot(u) - fd) <= 1e-6 * (1 + std::abs(fd)));
            // affine in gamma1
            const double h1 = ellipse_cbf_eval(s, o, p).h;
            CHECK(hocbf_eval(s, o, p, 2 * g1).h - e.h == Approx(g1 * h1).epsilon(1e-10).scale(1));
        }
    }

    // Static obstacle on the ellipse boundary with the vehicle at rest: h1 = dh1/dt = 0.
    Obstacle o = circle({3, 0}, 1.0);
    CHECK(hocbf_eval(UnicycleState{2, 0, 0.5, 0, 0}, o, ModelParams{}, 1.5).h == Approx(0.0).scale(1));

    o.velocity = {0.5, 0};
    CHECK_THROWS_AS(hocbf_eval(BicycleState{0, 0, 0, 1}, o, ModelParams{}, 1.0), UnsupportedError);
    CHECK_THROWS_AS(hocbf_eval(UnicycleState{}, o, ModelParams{}, 0.0), ValidationError);
}

TEST_CASE("barrier dispatch")
{
    const ModelParams p;
    const UnicycleState s{0, 0, 0, 1, 0};
    const Obstacle o = circle({5, 0}, 1);
    CHECK(evaluate_cbf(CbfKind::C3bf, s, o, p, 1).h == c3bf_eval(s, o, p).h);
    CHECK(evaluate_cbf(CbfKind::None, s, o, p, 1).h == c3bf_eval(s, o, p).h);
    CHECK(evaluate_cbf(CbfKind::Ellipse, s, o, p, 1).h == ellipse_cbf_eval(s, o, p).h);
    CHECK(evaluate_cbf(CbfKind::Hocbf, s, o, p, 2).h == hocbf_eval(s, o, p, 2).h);
}

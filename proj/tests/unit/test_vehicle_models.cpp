#include <doctest.h>

#include <cmath>
#include <numbers>

#include "c3bf/vehicle_models.hpp"
#include "oracles.hpp"

using namespace c3bf;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

void check_close(const Eigen::VectorXd& got, std::initializer_list<double> want, double tol = 1e-12)
{
    REQUIRE(got.size() == static_cast<Eigen::Index>(want.size()));
    Eigen::Index i = 0;
    for (double w : want) {
        CHECK(std::abs(got[i] - w) <= tol);
        ++i;
    }
}

}  // namespace

TEST_CASE("unicycle derivative examples")
{
    check_close(unicycle_derivative({0, 0, 0, 1, 0}, {0, 0}), {1, 0, 0, 0, 0});
    check_close(unicycle_derivative({0, 0, kPi / 2, 2, 0.5}, {1, -1}), {0, 2, 0.5, 1, -1});
    check_close(unicycle_derivative({3, -2, kPi / 4, std::sqrt(2.0), 0}, {0, 0}), {1, 1, 0, 0, 0});
    CHECK_THROWS_AS(unicycle_derivative({0, 0, 0, NAN, 0}, {0, 0}), ValidationError);
    CHECK_THROWS_AS(unicycle_derivative({0, 0, 0, 1, 0}, {INFINITY, 0}), ValidationError);
}

TEST_CASE("bicycle derivative examples")
{
    ModelParams p;
    p.lr = 1.0;
    check_close(bicycle_derivative({0, 0, 0, 1}, {0, 0}, p), {1, 0, 0, 0});
    check_close(bicycle_derivative({0, 0, 0, 2}, {1, 0.1}, p), {2, 0.2, 0.2, 1});
    check_close(bicycle_derivative({0, 0, 0, 0}, {0, 0.3}, [] {
        ModelParams q;
        q.beta_max = 0.5;
        return q;
    }()), {0, 0, 0, 0});
    CHECK_THROWS_AS(bicycle_derivative({0, 0, 0, 1}, {0, 0.25}, p), ValidationError);
}

TEST_CASE("point-mass derivative examples")
{
    check_close(pointmass_derivative({Vec2(0, 0), Vec2(1, 2)}, {0, 0}), {1, 2, 0, 0});
    check_close(pointmass_derivative({Vec2(5, 5), Vec2(0, 0)}, {1, -1}), {0, 0, 1, -1});
    check_close(pointmass_derivative({Vec2(1, 0), Vec2(-1, 1)}, {0.5, 0.5}), {-1, 1, 0.5, 0.5});
}

TEST_CASE("slip from steering")
{
    ModelParams p;
    p.lf = p.lr = 1.3;
    CHECK(slip_from_steering(0.0, p) == 0.0);
    CHECK(slip_from_steering(kPi / 4, p) == Approx(std::atan(0.5)).epsilon(1e-12));
    CHECK(slip_from_steering(kPi / 4, p) == Approx(0.4636).epsilon(1e-4));
    double prev = -kPi;
    for (double d = -1.5; d <= 1.5; d += 0.01) {
        const double b = slip_from_steering(d, p);
        CHECK(slip_from_steering(-d, p) == Approx(-b).epsilon(1e-15));
        CHECK(b > prev);
        prev = b;
    }
    CHECK_THROWS_AS(slip_from_steering(kPi / 2, p), ValidationError);
}

TEST_CASE("heading normalization lands in (-pi, pi]")
{
    CHECK(normalize_angle(kPi) == Approx(kPi));
    CHECK(normalize_angle(-kPi) == Approx(kPi));
    CHECK(normalize_angle(3 * kPi / 2) == Approx(-kPi / 2));
    for (double a = -20; a < 20; a += 0.37) {
        const double n = normalize_angle(a);
        CHECK(n > -kPi);
        CHECK(n <= kPi);
        CHECK(std::remainder(n - a, 2 * kPi) == Approx(0).scale(1).epsilon(1e-12));
    }
}

TEST_CASE("control affinity")
{
    test::Rng rng(11);
    for (ModelKind kind : {ModelKind::Unicycle, ModelKind::Bicycle, ModelKind::PointMass}) {
        for (int i = 0; i < 200; ++i) {
            ModelParams p = test::random_params(kind, rng);
            p.beta_max = 1.0;
            const VehicleState s = test::random_state(kind, rng);
            const ControlInput u1 = rng.vec(-0.4, 0.4), u2 = rng.vec(-0.4, 0.4);
            const Eigen::VectorXd lhs =
                derivative(s, u1, p) + derivative(s, u2, p) - derivative(s, ControlInput::Zero(), p);
            CHECK((lhs - derivative(s, u1 + u2, p)).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("RK4 step examples")
{
    const ModelParams p;
    const auto u1 = std::get<UnicycleState>(integrate_step(UnicycleState{0, 0, 0, 1, 0}, {0, 0}, p, 0.1));
    CHECK(u1.x == Approx(0.1).epsilon(1e-15));
    CHECK(u1.y == 0.0);
    CHECK(u1.v == 1.0);

    const auto pm = std::get<PointMassState>(integrate_step(PointMassState{}, {2, 0}, p, 0.5));
    CHECK(pm.p.x() == Approx(0.25).epsilon(1e-15));
    CHECK(pm.v.x() == Approx(1.0).epsilon(1e-15));
    CHECK(pm.p.y() == 0.0);

    VehicleState s = UnicycleState{0, 0, 0, 1, 1};
    for (int k = 0; k < 100; ++k) s = integrate_step(s, {0, 0}, p, 0.01);
    const auto& arc = std::get<UnicycleState>(s);
    CHECK(std::abs(arc.x - std::sin(1.0)) <= 1e-9);
    CHECK(std::abs(arc.y - (1 - std::cos(1.0))) <= 1e-9);
}

TEST_CASE("RK4 is fourth order on the constant-input arc")
{
    const ModelParams p;
    const double v = 1.5, w = 2.0;
    auto error = [&](double dt) {
        VehicleState s = UnicycleState{0, 0, 0, v, w};
        const int n = static_cast<int>(std::lround(1.0 / dt));
        for (int k = 0; k < n; ++k) s = integrate_step(s, {0, 0}, p, dt);
        const auto& u = std::get<UnicycleState>(s);
        return std::hypot(u.x - v / w * std::sin(w), u.y - v / w * (1 - std::cos(w)));
    };
    const double e1 = error(0.1), e2 = error(0.05);
    CHECK(e1 / e2 >= 15.0);
}

TEST_CASE("integration renormalizes heading and rejects blow-up")
{
    const ModelParams p;
    VehicleState s = UnicycleState{0, 0, 3.1, 0, 1};
    for (int k = 0; k < 10; ++k) s = integrate_step(s, {0, 0}, p, 0.1);
    const double th = std::get<UnicycleState>(s).theta;
    CHECK(th > -kPi);
    CHECK(th <= kPi);
    CHECK(th == Approx(normalize_angle(4.1)).epsilon(1e-12));
    CHECK_THROWS_AS(integrate_step(UnicycleState{0, 0, 0, 1e308, 0}, {1e308, 0}, p, 1e10), SimulationError);
}

#include "c3bf/vehicle_models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace c3bf {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(const ControlInput& u, const char* who)
{
    if (!u.allFinite()) {
        std::ostringstream os;
        os << who << ": non-finite control input (" << u(0) << ", " << u(1) << ")";
        throw ValidationError(os.str());
    }
}

template <class State>
State rk4(const State& s, double dt, auto&& f, auto&& add)
{
    const auto k1 = f(s);
    const auto k2 = f(add(s, k1, dt / 2.0));
    const auto k3 = f(add(s, k2, dt / 2.0));
    const auto k4 = f(add(s, k3, dt));
    return add(s, (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0, dt);
}

}  // namespace

void ModelParams::validate() const
{
    auto fail = [](const std::string& m) { throw ValidationError("model params: " + m); };
    if (!(std::isfinite(l) && l >= 0.0)) fail("l must be finite and >= 0");
    if (!(std::isfinite(lf) && lf > 0.0)) fail("lf must be > 0");
    if (!(std::isfinite(lr) && lr > 0.0)) fail("lr must be > 0");
    if (!(std::isfinite(w) && w >= 0.0)) fail("w must be finite and >= 0");
    if (!(beta_max > 0.0 && beta_max < kPi / 2.0)) fail("beta_max must lie in (0, pi/2)");
    if (!(v_max > 0.0)) fail("v_max must be > 0");
}

double normalize_angle(double a)
{
    a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

Vector5d unicycle_derivative(const UnicycleState& s, const ControlInput& u)
{
    require_finite(u, "unicycle_derivative");
    if (!is_finite(VehicleState{s})) throw ValidationError("unicycle_derivative: non-finite state");
    Vector5d d;
    d << s.v * std::cos(s.theta), s.v * std::sin(s.theta), s.omega, u(0), u(1);
    return d;
}

Eigen::Vector4d bicycle_derivative(const BicycleState& s, const ControlInput& u, const ModelParams& params)
{
    require_finite(u, "bicycle_derivative");
    if (!is_finite(VehicleState{s})) throw ValidationError("bicycle_derivative: non-finite state");
    const double beta = u(1);
    if (std::abs(beta) > params.beta_max * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "bicycle_derivative: |beta| = " << std::abs(beta) << " exceeds beta_max = " << params.beta_max
           << "; small-slip model is invalid there";
        throw ValidationError(os.str());
    }
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    Eigen::Vector4d d;
    d << s.v * c - s.v * beta * sn, s.v * sn + s.v * beta * c, s.v * beta / params.lr, u(0);
    return d;
}

double slip_from_steering(double delta, const ModelParams& params)
{
    if (!(std::abs(delta) < kPi / 2.0))
        throw ValidationError("slip_from_steering: |delta| must be < pi/2");
    return std::atan(params.lr / (params.lf + params.lr) * std::tan(delta));
}

Eigen::Vector4d pointmass_derivative(const PointMassState& s, const ControlInput& u)
{
    require_finite(u, "pointmass_derivative");
    if (!is_finite(VehicleState{s})) throw ValidationError("pointmass_derivative: non-finite state");
    Eigen::Vector4d d;
    d << s.v, u;
    return d;
}

int state_dimension(ModelKind kind)
{
    switch (kind) {
    case ModelKind::Unicycle: return 5;
    case ModelKind::Bicycle: return 4;
    case ModelKind::PointMass: return 4;
    }
    return 0;
}

Eigen::VectorXd to_vector(const VehicleState& s)
{
    return std::visit(
        [](const auto& st) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(st)>;
            if constexpr (std::is_same_v<T, UnicycleState>) {
                Eigen::VectorXd x(5);
                x << st.x, st.y, st.theta, st.v, st.omega;
                return x;
            } else if constexpr (std::is_same_v<T, BicycleState>) {
                Eigen::VectorXd x(4);
                x << st.x, st.y, st.theta, st.v;
                return x;
            } else {
                Eigen::VectorXd x(4);
                x << st.p, st.v;
                return x;
            }
        },
        s);
}

VehicleState from_vector(ModelKind kind, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    if (x.size() != state_dimension(kind))
        throw ValidationError(std::string("state vector has wrong length for model ") + to_string(kind));
    switch (kind) {
    case ModelKind::Unicycle: return UnicycleState{x(0), x(1), x(2), x(3), x(4)};
    case ModelKind::Bicycle: return BicycleState{x(0), x(1), x(2), x(3)};
    case ModelKind::PointMass: return PointMassState{Vec2(x(0), x(1)), Vec2(x(2), x(3))};
    }
    throw ValidationError("unknown model kind");
}

Eigen::VectorXd derivative(const VehicleState& s, const ControlInput& u, const ModelParams& params)
{
    return std::visit(
        [&](const auto& st) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(st)>;
            if constexpr (std::is_same_v<T, UnicycleState>)
                return unicycle_derivative(st, u);
            else if constexpr (std::is_same_v<T, BicycleState>)
                return bicycle_derivative(st, u, params);
            else
                return pointmass_derivative(st, u);
        },
        s);
}

VehicleState integrate_step(const VehicleState& s, const ControlInput& u, const ModelParams& params, double dt)
{
    if (!(dt > 0.0 && std::isfinite(dt))) throw ValidationError("integrate_step: dt must be > 0");
    const ModelKind kind = model_kind(s);
    const Eigen::VectorXd x0 = to_vector(s);
    auto f = [&](const Eigen::VectorXd& x) { return derivative(from_vector(kind, x), u, params); };
    auto add = [](const Eigen::VectorXd& x, const Eigen::VectorXd& k, double h) -> Eigen::VectorXd {
        return x + h * k;
    };
    require_finite(u, "integrate_step");
    if (!x0.allFinite()) throw ValidationError("integrate_step: non-finite state");
    if (kind == ModelKind::Bicycle && std::abs(u(1)) > params.beta_max * (1.0 + 1e-12))
        throw ValidationError("integrate_step: |beta| exceeds beta_max");
    Eigen::VectorXd x1;
    try {
        x1 = rk4(x0, dt, f, add);
    } catch (const ValidationError&) {
        // An intermediate stage left the finite range; the inputs themselves were checked.
        throw SimulationError("integrate_step: non-finite intermediate RK4 stage", 0);
    }
    if (!x1.allFinite()) throw SimulationError("integrate_step: non-finite state after RK4 step", 0);
    if (kind != ModelKind::PointMass) x1(2) = normalize_angle(x1(2));
    return from_vector(kind, x1);
}

bool is_finite(const VehicleState& s)
{
    return to_vector(s).allFinite();
}

double heading(const VehicleState& s)
{
    if (const auto* pm = std::get_if<PointMassState>(&s)) {
        if (pm->v.norm() == 0.0) return 0.0;
        return std::atan2(pm->v.y(), pm->v.x());
    }
    if (const auto* u = std::get_if<UnicycleState>(&s)) return u->theta;
    return std::get<BicycleState>(s).theta;
}

double forward_speed(const VehicleState& s, double reference_heading)
{
    if (const auto* pm = std::get_if<PointMassState>(&s))
        return pm->v.dot(Vec2(std::cos(reference_heading), std::sin(reference_heading)));
    if (const auto* u = std::get_if<UnicycleState>(&s)) return u->v;
    return std::get<BicycleState>(s).v;
}

Vec2 position(const VehicleState& s)
{
    if (const auto* pm = std::get_if<PointMassState>(&s)) return pm->p;
    if (const auto* u = std::get_if<UnicycleState>(&s)) return {u->x, u->y};
    const auto& b = std::get<BicycleState>(s);
    return {b.x, b.y};
}

}  // namespace c3bf

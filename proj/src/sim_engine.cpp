#include "c3bf/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "c3bf/vehicle_models.hpp"

namespace c3bf {

namespace {

std::size_t step_index(double t, double dt)
{
    return static_cast<std::size_t>(std::llround(t / dt));
}

Vec2 obstacle_velocity(const ObstacleSpec& o, std::size_t step, double dt)
{
    Vec2 vel = o.initial.velocity;
    for (const auto& seg : o.segments)
        if (step >= step_index(seg.t_start, dt)) vel = seg.velocity;
    return vel;
}

ControlInput reference_input(const Scenario& sc, const VehicleState& s)
{
    const ControllerSpec& c = sc.controller;
    if (const auto* u = std::get_if<UnicycleState>(&s)) {
        ControlInput out = p_controller(*u, c.gains);
        if (c.accel_limit) out(0) = std::clamp(out(0), -*c.accel_limit, *c.accel_limit);
        return out;
    }
    if (const auto* b = std::get_if<BicycleState>(&s)) {
        const double a = p_speed_bicycle(*b, c.gains, c.accel_limit);
        const double beta = c.path ? stanley_lateral(*b, *c.path, c.stanley, sc.params) : 0.0;
        return {a, beta};
    }
    ControlInput out = pointmass_velocity_tracker(std::get<PointMassState>(s), c.gains, c.heading_des);
    if (c.accel_limit) out = out.cwiseMax(-*c.accel_limit).cwiseMin(*c.accel_limit);
    return out;
}

VehicleState saturate_speed(VehicleState s, double v_max)
{
    if (auto* u = std::get_if<UnicycleState>(&s)) u->v = std::clamp(u->v, -v_max, v_max);
    else if (auto* b = std::get_if<BicycleState>(&s)) b->v = std::clamp(b->v, -v_max, v_max);
    else {
        auto& pm = std::get<PointMassState>(s);
        const double n = pm.v.norm();
        if (n > v_max) pm.v *= v_max / n;
    }
    return s;
}

double unwrap_step(double prev_unwrapped, double raw)
{
    return prev_unwrapped + normalize_angle(raw - normalize_angle(prev_unwrapped));
}

}  // namespace

void Scenario::validate() const
{
    auto fail = [](const std::string& m) { throw ValidationError(m); };
    if (!(std::isfinite(dt) && dt > 0.0)) fail("sim.dt must be > 0");
    if (!(std::isfinite(duration) && duration > 0.0)) fail("sim.duration must be > 0");
    if (dt > duration) fail("sim.dt must not exceed sim.duration");
    if (model_kind(initial) != model)
        fail(std::string("initial_state does not match model ") + to_string(model));
    if (!is_finite(initial)) fail("initial_state must be finite");
    if (!(collision_slack >= 0.0)) fail("sim.collision_slack must be >= 0");
    if (!(hocbf_gamma1 > 0.0)) fail("hocbf_gamma1 must be > 0");
    params.validate();
    filter.validate();
    controller.gains.validate(params.v_max);
    if (controller.accel_limit && !(*controller.accel_limit > 0.0)) fail("controller.accel_limit must be > 0");
    if (!(controller.stanley.k_e > 0.0 && controller.stanley.v_floor > 0.0 && controller.stanley.max_steer > 0.0 &&
          controller.stanley.max_steer < std::numbers::pi / 2.0))
        fail("controller.stanley: k_e, v_floor > 0 and 0 < max_steer < pi/2 required");
    if (controller.path && model != ModelKind::Bicycle) fail("controller.path is only used by the bicycle model");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const ObstacleSpec& o = obstacles[i];
        const std::string where = "obstacles[" + std::to_string(i) + "]";
        try {
            o.initial.validate();
        } catch (const ValidationError& e) {
            fail(where + ": " + e.what());
        }
        const double r = effective_radius(o.initial, params);
        if (!(filter.activation_radius > r))
            fail(where + ": filter.activation_radius must exceed the effective radius " + std::to_string(r));
        double prev = -kInf;
        bool moving = o.initial.velocity.squaredNorm() > 0.0;
        for (const auto& seg : o.segments) {
            if (!(std::isfinite(seg.t_start) && seg.t_start >= 0.0 && seg.t_start >= prev))
                fail(where + ": velocity segments need non-negative, non-decreasing t_start");
            if (!seg.velocity.allFinite()) fail(where + ": segment velocity must be finite");
            moving = moving || seg.velocity.squaredNorm() > 0.0;
            prev = seg.t_start;
        }
        if (cbf == CbfKind::Hocbf && model == ModelKind::Bicycle && moving)
            fail(where + ": hocbf is not a valid barrier for the bicycle with a moving obstacle");
    }
}

std::size_t Scenario::step_count() const
{
    return static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
}

TrajectoryLog run_scenario(const Scenario& sc)
{
    sc.validate();

    TrajectoryLog log;
    log.scenario = sc.name;
    log.model = sc.model;
    log.cbf = sc.cbf;
    log.dt = sc.dt;
    log.gamma = sc.filter.gamma;
    log.v_des = sc.controller.gains.v_des;
    log.reference_heading = sc.model == ModelKind::PointMass ? sc.controller.heading_des : heading(sc.initial);
    log.beta_max = sc.params.beta_max;

    FilterConfig cfg = sc.filter;
    if (sc.model == ModelKind::Bicycle) {
        InputBounds b = cfg.input_bounds.value_or(InputBounds{});
        b.lower(1) = std::max(b.lower(1), -sc.params.beta_max);
        b.upper(1) = std::min(b.upper(1), sc.params.beta_max);
        cfg.input_bounds = b;
    }

    std::vector<Obstacle> obstacles;
    obstacles.reserve(sc.obstacles.size());
    for (const auto& o : sc.obstacles) obstacles.push_back(o.initial);

    const std::size_t n_steps = sc.step_count();
    log.records.reserve(n_steps + 1);
    VehicleState state = sc.initial;
    std::size_t degenerate_run = 0;
    std::vector<CbfEvaluation> evals(obstacles.size());
    std::vector<CbfEvaluation> active_evals;
    std::vector<std::size_t> active_index;

    for (std::size_t k = 0; k <= n_steps; ++k) {
        StepRecord rec;
        rec.t = static_cast<double>(k) * sc.dt;
        rec.state = state;
        for (std::size_t i = 0; i < obstacles.size(); ++i)
            obstacles[i].velocity = obstacle_velocity(sc.obstacles[i], k, sc.dt);

        rec.u_ref = reference_input(sc, state);
        rec.obstacles.resize(obstacles.size());
        active_evals.clear();
        active_index.clear();
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            ObstacleSample& smp = rec.obstacles[i];
            const RelativeKinematics rk = rel_kinematics(state, obstacles[i], sc.params);
            smp.r = effective_radius(obstacles[i], sc.params);
            smp.dist = rk.p_rel.norm();
            smp.center = obstacles[i].center;
            smp.velocity = obstacles[i].velocity;
            evals[i] = evaluate_cbf(sc.cbf, state, obstacles[i], sc.params, sc.hocbf_gamma1);
            smp.h = evals[i].h;
            smp.penetration = smp.dist <= smp.r;
            smp.psi = evals[i].lfh + evals[i].lgh.dot(rec.u_ref) + cfg.gamma * evals[i].h;
            smp.active = sc.cbf != CbfKind::None && activation_gate(smp.dist, cfg);
            if (smp.active) {
                active_evals.push_back(evals[i]);
                active_index.push_back(i);
            }
            if (smp.penetration) ++log.events.penetration;
        }

        rec.u_star = rec.u_ref;
        if (sc.model == ModelKind::Bicycle) rec.u_star(1) = std::clamp(rec.u_star(1), -sc.params.beta_max, sc.params.beta_max);
        if (!active_evals.empty()) {
            const FilterResult fr = filter_qp(rec.u_ref, active_evals, cfg);
            rec.u_star = fr.u_star;
            rec.degenerate = fr.degenerate;
            rec.infeasible = fr.infeasible;
            rec.bounds_binding = fr.bounds_binding;
            if (sc.model == ModelKind::Bicycle)
                rec.u_star(1) = std::clamp(rec.u_star(1), -sc.params.beta_max, sc.params.beta_max);
        }
        if (rec.degenerate) ++log.events.degenerate;
        if (rec.infeasible) ++log.events.infeasible;
        if (rec.bounds_binding) ++log.events.bounds_binding;

        bool collided = false;
        for (const auto& smp : rec.obstacles)
            if (smp.dist <= smp.r - sc.collision_slack) collided = true;
        log.records.push_back(std::move(rec));
        const StepRecord& last = log.records.back();
        if (collided) {
            log.collision = true;
            log.collision_step = k;
            break;
        }
        if (k == n_steps) break;

        degenerate_run = last.degenerate ? degenerate_run + 1 : 0;
        if (degenerate_run > sc.max_degenerate_steps)
            throw SimulationError("filter degenerate for more than " + std::to_string(sc.max_degenerate_steps) +
                                      " consecutive steps",
                                  k);
        try {
            state = integrate_step(state, last.u_star, sc.params, sc.dt);
        } catch (const SimulationError&) {
            throw SimulationError("integrator produced a non-finite state", k);
        }
        if (sc.saturate_speed) state = saturate_speed(state, sc.params.v_max);
        for (auto& o : obstacles) o.center += o.velocity * sc.dt;
    }
    return log;
}

const char* to_string(Behavior b)
{
    switch (b) {
    case Behavior::Turning: return "turning";
    case Behavior::Braking: return "braking";
    case Behavior::Reversing: return "reversing";
    case Behavior::Overtaking: return "overtaking";
    }
    return "?";
}

std::optional<std::size_t> first_active_step(const TrajectoryLog& log)
{
    for (std::size_t k = 0; k < log.records.size(); ++k)
        if (log.records[k].filter_active()) return k;
    return std::nullopt;
}

double max_heading_change(const TrajectoryLog& log, std::size_t from)
{
    const double speed_floor = 0.1 * std::abs(log.v_des);
    bool have_start = false;
    double start = 0.0;
    double unwrapped = 0.0;
    double max_change = 0.0;
    for (std::size_t k = from; k < log.records.size(); ++k) {
        const StepRecord& rec = log.records[k];
        if (log.model == ModelKind::PointMass) {
            const auto& pm = std::get<PointMassState>(rec.state);
            if (pm.v.norm() <= speed_floor) continue;
        }
        const double raw = heading(rec.state);
        if (!have_start) {
            have_start = true;
            start = unwrapped = raw;
            continue;
        }
        unwrapped = unwrap_step(unwrapped, raw);
        max_change = std::max(max_change, std::abs(unwrapped - start));
    }
    return max_change;
}

std::vector<Behavior> classify_behavior(const TrajectoryLog& log)
{
    std::vector<Behavior> labels;
    if (log.records.empty()) return labels;

    // Speed and heading are only judged once the filter has engaged, so a vehicle that
    // starts at rest or with a reference-driven swing is not mislabelled.
    const std::optional<std::size_t> engaged = first_active_step(log);
    if (!engaged) return labels;
    double min_v = kInf;
    for (std::size_t k = *engaged; k < log.records.size(); ++k)
        min_v = std::min(min_v, forward_speed(log.records[k].state, log.reference_heading));
    const double turn = max_heading_change(log, *engaged) * 180.0 / std::numbers::pi;
    const bool reversing = min_v < -kReverseSpeedTol;

    if (turn >= kTurnThresholdDeg && !reversing) labels.push_back(Behavior::Turning);
    if (!reversing && min_v < kBrakeSpeedFraction * std::abs(log.v_des) && turn < kTurnThresholdDeg)
        labels.push_back(Behavior::Braking);
    if (reversing) labels.push_back(Behavior::Reversing);

    // Overtaking: a moving obstacle travelling roughly along the vehicle's heading that
    // starts ahead and ends up behind it.
    const std::size_t n_obs = log.records.front().obstacles.size();
    for (std::size_t i = 0; i < n_obs; ++i) {
        bool overtaken = false;
        double prev_along = 0.0;
        for (std::size_t k = 0; k < log.records.size(); ++k) {
            const StepRecord& rec = log.records[k];
            const double th = log.model == ModelKind::PointMass ? log.reference_heading : heading(rec.state);
            const Vec2 dir(std::cos(th), std::sin(th));
            const ObstacleSample& o = rec.obstacles[i];
            const double along = (o.center - position(rec.state)).dot(dir);
            const double o_along = o.velocity.dot(dir);
            if (k > 0 && prev_along > 0.0 && along <= 0.0 && o_along > kOvertakeAlignment * o.velocity.norm() &&
                forward_speed(rec.state, log.reference_heading) > o_along)
                overtaken = true;
            prev_along = along;
        }
        if (overtaken) {
            labels.push_back(Behavior::Overtaking);
            break;
        }
    }
    return labels;
}

SafetySummary safety_metrics(const TrajectoryLog& log)
{
    SafetySummary s;
    s.collision = log.collision;
    if (log.records.empty()) return s;
    s.min_clearance.assign(log.records.front().obstacles.size(), kInf);
    std::size_t active_steps = 0;
    double max_beta = 0.0;
    for (const auto& rec : log.records) {
        for (std::size_t i = 0; i < rec.obstacles.size(); ++i) {
            s.min_clearance[i] = std::min(s.min_clearance[i], rec.obstacles[i].dist - rec.obstacles[i].r);
            s.min_h = std::min(s.min_h, rec.obstacles[i].h);
        }
        const double u_safe = (rec.u_star - rec.u_ref).norm();
        if (u_safe > 0.0) ++active_steps;
        s.max_u_safe = std::max(s.max_u_safe, u_safe);
        max_beta = std::max(max_beta, std::abs(rec.u_star(1)));
    }
    s.active_fraction = static_cast<double>(active_steps) / static_cast<double>(log.records.size());
    if (log.model == ModelKind::Bicycle) s.max_abs_beta = max_beta;
    return s;
}

}  // namespace c3bf

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "c3bf/cone_cbf.hpp"
#include "c3bf/controllers.hpp"
#include "c3bf/safety_filter.hpp"
#include "c3bf/types.hpp"

namespace c3bf {

/// From t_start on (snapped to the step grid) the obstacle moves with `velocity`.
struct VelocitySegment {
    double t_start = 0.0;
    Vec2 velocity = Vec2::Zero();
};

struct ObstacleSpec {
    std::string name;
    Obstacle initial;
    std::vector<VelocitySegment> segments;  // sorted by t_start
};

struct ControllerSpec {
    PGains gains;
    std::optional<ReferencePath> path;  // bicycle: Stanley lateral tracking when present
    StanleyGains stanley;
    double heading_des = 0.0;           // point mass: direction of the target velocity
    std::optional<double> accel_limit;  // clamp on the reference acceleration
};

struct Scenario {
    std::string name;
    ModelKind model = ModelKind::Unicycle;
    VehicleState initial = UnicycleState{};
    ModelParams params;
    std::vector<ObstacleSpec> obstacles;
    ControllerSpec controller;
    FilterConfig filter;
    CbfKind cbf = CbfKind::C3bf;
    double hocbf_gamma1 = 1.0;
    double dt = 0.01;
    double duration = 10.0;
    double collision_slack = 1e-6;
    std::size_t max_degenerate_steps = 1000;
    bool saturate_speed = false;

    /// Throws ValidationError with a field-level message.
    void validate() const;
    std::size_t step_count() const;  // floor(duration / dt)
};

struct ObstacleSample {
    double h = 0.0;
    double psi = 0.0;
    double dist = 0.0;
    double r = 0.0;
    Vec2 center = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();
    bool active = false;
    bool penetration = false;
};

struct StepRecord {
    double t = 0.0;
    VehicleState state;
    ControlInput u_ref = ControlInput::Zero();
    ControlInput u_star = ControlInput::Zero();
    std::vector<ObstacleSample> obstacles;
    bool degenerate = false;
    bool infeasible = false;
    bool bounds_binding = false;

    bool filter_active() const { return (u_star - u_ref).norm() > 0.0; }
};

struct EventCounts {
    std::size_t degenerate = 0;
    std::size_t infeasible = 0;
    std::size_t bounds_binding = 0;  // steps where an input bound removed the feasibility guarantee
    std::size_t penetration = 0;
};

struct TrajectoryLog {
    std::string scenario;
    ModelKind model = ModelKind::Unicycle;
    CbfKind cbf = CbfKind::C3bf;
    double dt = 0.0;
    double gamma = 1.0;
    double v_des = 0.0;
    double reference_heading = 0.0;
    double beta_max = 0.0;
    std::vector<StepRecord> records;
    bool collision = false;
    std::optional<std::size_t> collision_step;
    EventCounts events;
};

/// Closed loop: reference -> gate -> barriers -> QP filter -> RK4. Bit-for-bit
/// deterministic. Stops at the first step with dist <= r - collision_slack.
/// Throws ValidationError for an invalid scenario and SimulationError when the integrator
/// diverges or the filter stays degenerate for more than max_degenerate_steps.
TrajectoryLog run_scenario(const Scenario& sc);

enum class Behavior { Turning, Braking, Reversing, Overtaking };
const char* to_string(Behavior b);

/// Rule thresholds (fixed).
inline constexpr double kTurnThresholdDeg = 15.0;
inline constexpr double kBrakeSpeedFraction = 0.1;
inline constexpr double kReverseSpeedTol = 1e-3;  // m/s below zero before a run counts as reversing
inline constexpr double kOvertakeAlignment = 0.5;  // min cosine between obstacle velocity and heading

/// Labels a completed run; several labels may apply. All rules only look at the part of
/// the run after the filter first modified the input; a run where it never did gets none.
///  turning    - unwrapped heading swept >= kTurnThresholdDeg, never reversing
///  braking    - forward speed drops below kBrakeSpeedFraction * v_des without reversing or turning
///  reversing  - forward speed drops below -kReverseSpeedTol
///  overtaking - an obstacle moving along the direction of travel (within 60 deg) passes from
///               ahead to behind while the vehicle is faster than it
std::vector<Behavior> classify_behavior(const TrajectoryLog& log);

struct SafetySummary {
    std::vector<double> min_clearance;  // per obstacle, min over time of dist - r
    double min_h = kInf;                // over all obstacles and steps
    double active_fraction = 0.0;       // steps with u_safe != 0
    double max_u_safe = 0.0;
    std::optional<double> max_abs_beta;  // bicycle only
    bool collision = false;
};

SafetySummary safety_metrics(const TrajectoryLog& log);

/// First step whose filtered input differs from the reference.
std::optional<std::size_t> first_active_step(const TrajectoryLog& log);

/// Heading swept from step `from` on: max |theta(t) - theta(t_from)| on the unwrapped
/// heading (rad). Point-mass samples slower than 0.1 v_des carry no heading and are skipped.
double max_heading_change(const TrajectoryLog& log, std::size_t from = 0);

}  // namespace c3bf

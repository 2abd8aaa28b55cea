#include <doctest.h>

#include <cmath>
#include <sstream>

#include "c3bf/sim_engine.hpp"
#include "c3bf/trajectory_csv.hpp"
#include "oracles.hpp"

using namespace c3bf;
using doctest::Approx;

namespace {

Scenario free_unicycle()
{
    Scenario sc;
    sc.name = "free";
    sc.initial = UnicycleState{0, 0, 0.2, 0.0, 0.5};
    sc.controller.gains = {1.5, 1.0, 2.0};
    sc.dt = 0.01;
    sc.duration = 10.0;
    return sc;
}

ObstacleSpec post(Vec2 c, double radius)
{
    ObstacleSpec o;
    o.name = "post";
    o.initial.center = c;
    o.initial.c1 = o.initial.c2 = radius;
    return o;
}

std::string csv_of(const TrajectoryLog& log)
{
    std::ostringstream s;
    write_trajectory_csv(s, log);
    return s.str();
}

}  // namespace

TEST_CASE("obstacle-free run: speed converges geometrically and the filter stays idle")
{
    const Scenario sc = free_unicycle();
    const TrajectoryLog log = run_scenario(sc);
    REQUIRE(log.records.size() == sc.step_count() + 1);
    double prev_err = kInf;
    for (std::size_t k = 0; k < log.records.size(); ++k) {
        const StepRecord& r = log.records[k];
        CHECK(r.t == Approx(static_cast<double>(k) * sc.dt).epsilon(1e-12));
        CHECK(r.u_star == r.u_ref);
        const double err = std::abs(std::get<UnicycleState>(r.state).v - 2.0);
        CHECK(err <= prev_err);
        // Zero-order hold: v_{k+1} - v_des = (1 - k1 dt)(v_k - v_des) exactly.
        CHECK(std::abs(err - 2.0 * std::pow(1.0 - 1.5 * sc.dt, static_cast<double>(k))) <= 1e-12);
        prev_err = err;
    }
    // After 10/k1 seconds the error is within e^-10 of its start.
    const std::size_t k_settle = static_cast<std::size_t>(std::ceil(10.0 / 1.5 / sc.dt));
    CHECK(std::abs(std::get<UnicycleState>(log.records[k_settle].state).v - 2.0) <= 2.0 * std::exp(-10.0));
    CHECK(classify_behavior(log).empty());
    const SafetySummary m = safety_metrics(log);
    CHECK(m.active_fraction == 0.0);
    CHECK(m.max_u_safe == 0.0);
    CHECK(m.min_clearance.empty());
    CHECK_FALSE(m.collision);
}

TEST_CASE("record count and spacing")
{
    Scenario sc = free_unicycle();
    sc.dt = 0.03;
    sc.duration = 1.0;
    const TrajectoryLog log = run_scenario(sc);
    CHECK(log.records.size() == 34);
    CHECK(log.records.back().t == Approx(0.99));
}

TEST_CASE("runs are bit-identical")
{
    const Scenario sc = load_scenario_file(test::scenario_root() / "corpus" / "uni_multi_obstacle.json");
    CHECK(csv_of(run_scenario(sc)) == csv_of(run_scenario(sc)));
}

TEST_CASE("head-on static obstacle is avoided")
{
    for (const char* name : {"turning.json", "braking.json"}) {
        CAPTURE(name);
        const TrajectoryLog log = run_scenario(load_scenario_file(test::scenario_root() / "gallery" / name));
        CHECK_FALSE(log.collision);
        const SafetySummary m = safety_metrics(log);
        REQUIRE(m.min_clearance.size() == 1);
        CHECK(m.min_clearance[0] > 0.0);
    }
}

TEST_CASE("overtaking geometry passes the obstacle")
{
    const TrajectoryLog log = run_scenario(load_scenario_file(test::scenario_root() / "gallery" / "overtaking.json"));
    CHECK_FALSE(log.collision);
    const auto labels = classify_behavior(log);
    CHECK(std::find(labels.begin(), labels.end(), Behavior::Overtaking) != labels.end());
    const StepRecord& last = log.records.back();
    const auto& s = std::get<UnicycleState>(last.state);
    CHECK(s.x > last.obstacles[0].center.x());
}

TEST_CASE("unfiltered run stops at the collision step")
{
    const Scenario sc = load_scenario_file(test::scenario_root() / "baseline" / "turning_unfiltered.json");
    const TrajectoryLog log = run_scenario(sc);
    REQUIRE(log.collision);
    REQUIRE(log.collision_step);
    CHECK(*log.collision_step == log.records.size() - 1);
    CHECK(log.records.size() < sc.step_count() + 1);
    const ObstacleSample& o = log.records.back().obstacles[0];
    CHECK(o.dist <= o.r - sc.collision_slack);
    for (const StepRecord& r : log.records) CHECK(r.u_star == r.u_ref);
}

TEST_CASE("perception boundary gates the barrier")
{
    Scenario sc = free_unicycle();
    sc.initial = UnicycleState{0, 0, 0, 1, 0};
    sc.controller.gains = {1.0, 1.0, 1.0};
    sc.params.l = 0.3;
    sc.obstacles.push_back(post({12, 0}, 1.0));
    sc.filter.activation_radius = 5.0;
    sc.duration = 12.0;
    const TrajectoryLog log = run_scenario(sc);
    for (const StepRecord& r : log.records) {
        const ObstacleSample& o = r.obstacles[0];
        CHECK(o.active == (o.dist <= 5.0));
        if (!o.active) CHECK(r.u_star == r.u_ref);
    }
    CHECK_FALSE(log.collision);
}

TEST_CASE("velocity segments switch on the step grid")
{
    Scenario sc = free_unicycle();
    ObstacleSpec o = post({20, 20}, 0.5);
    o.initial.velocity = {1, 0};
    o.segments.push_back({0.5, Vec2(0, -2)});
    sc.obstacles.push_back(o);
    sc.dt = 0.1;
    sc.duration = 1.0;
    const TrajectoryLog log = run_scenario(sc);
    for (const StepRecord& r : log.records) {
        const Vec2 expect = r.t < 0.5 - 1e-9 ? Vec2(20 + r.t, 20) : Vec2(20.5, 20 - 2 * (r.t - 0.5));
        CHECK((r.obstacles[0].center - expect).norm() <= 1e-12);
    }
}

TEST_CASE("persistent degeneracy aborts the run")
{
    Scenario sc = free_unicycle();
    sc.cbf = CbfKind::Ellipse;
    sc.initial = UnicycleState{0, 0, 0, 2, 0};
    sc.obstacles.push_back(post({3, 0}, 1.0));
    sc.max_degenerate_steps = 5;
    CHECK_THROWS_AS(run_scenario(sc), SimulationError);
}

TEST_CASE("scenario validation")
{
    Scenario sc = free_unicycle();
    sc.dt = 0.0;
    CHECK_THROWS_AS(run_scenario(sc), ValidationError);
    sc = free_unicycle();
    sc.dt = 20.0;
    CHECK_THROWS_AS(sc.validate(), ValidationError);
    sc = free_unicycle();
    sc.initial = BicycleState{};
    CHECK_THROWS_AS(sc.validate(), ValidationError);
    sc = free_unicycle();
    sc.obstacles.push_back(post({5, 5}, 2.0));
    sc.filter.activation_radius = 1.5;
    CHECK_THROWS_AS(sc.validate(), ValidationError);
    sc = free_unicycle();
    sc.model = ModelKind::Bicycle;
    sc.initial = BicycleState{};
    sc.cbf = CbfKind::Hocbf;
    ObstacleSpec mover = post({5, 5}, 1.0);
    mover.initial.velocity = {1, 0};
    sc.obstacles.push_back(mover);
    CHECK_THROWS_AS(sc.validate(), ValidationError);
}

TEST_CASE("behavior labels")
{
    auto labels_of = [](const char* set, const char* name) {
        return classify_behavior(run_scenario(load_scenario_file(test::scenario_root() / set / name)));
    };
    auto has = [](const std::vector<Behavior>& v, Behavior b) { return std::find(v.begin(), v.end(), b) != v.end(); };

    const auto rev = labels_of("gallery", "reversing.json");
    CHECK(has(rev, Behavior::Reversing));
    CHECK_FALSE(has(rev, Behavior::Turning));
    CHECK_FALSE(has(rev, Behavior::Braking));

    const auto turn = labels_of("gallery", "turning.json");
    CHECK(has(turn, Behavior::Turning));
    CHECK_FALSE(has(turn, Behavior::Braking));

    const auto brake = labels_of("gallery", "braking.json");
    CHECK(has(brake, Behavior::Braking));
    CHECK_FALSE(has(brake, Behavior::Turning));

    CHECK(std::string(to_string(Behavior::Overtaking)) == "overtaking");
}

TEST_CASE("safety metrics on a bicycle run")
{
    const Scenario sc = load_scenario_file(test::scenario_root() / "corpus" / "bic_turn_crossing.json");
    const TrajectoryLog log = run_scenario(sc);
    const SafetySummary m = safety_metrics(log);
    REQUIRE(m.max_abs_beta);
    CHECK(*m.max_abs_beta <= sc.params.beta_max);
    CHECK(m.active_fraction > 0.0);
    CHECK(m.active_fraction <= 1.0);
    CHECK(m.max_u_safe > 0.0);
    double min_h = kInf;
    for (const StepRecord& r : log.records)
        for (const ObstacleSample& o : r.obstacles) min_h = std::min(min_h, o.h);
    CHECK(m.min_h == min_h);
}

TEST_CASE("heading change helper")
{
    const TrajectoryLog log = run_scenario(load_scenario_file(test::scenario_root() / "gallery" / "turning.json"));
    const auto first = first_active_step(log);
    REQUIRE(first);
    CHECK(log.records[*first].filter_active());
    for (std::size_t k = 0; k < *first; ++k) CHECK_FALSE(log.records[k].filter_active());
    CHECK(max_heading_change(log, *first) * 180.0 / std::numbers::pi >= kTurnThresholdDeg);
}

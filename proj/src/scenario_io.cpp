#include "c3bf/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>
#include <sstream>

namespace c3bf {

using nlohmann::json;

namespace {

// Strict view over one JSON object: every key must be declared, every access is typed.
class Fields {
public:
    Fields(const json& j, std::string where, std::initializer_list<const char*> allowed) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object()) fail("", "expected an object");
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, _] : j_.items())
            if (!ok.count(key)) fail(key, "unknown key");
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json& at(const char* key) const
    {
        if (!has(key)) fail(key, "missing required field");
        return j_.at(key);
    }

    double number(const char* key) const
    {
        const json& v = at(key);
        if (!v.is_number()) fail(key, "expected a number");
        return v.get<double>();
    }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    bool boolean(const char* key, bool fallback) const
    {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) fail(key, "expected true or false");
        return v.get<bool>();
    }

    std::string string(const char* key) const
    {
        const json& v = at(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }

    std::size_t count(const char* key, std::size_t fallback) const
    {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
        return v.get<std::size_t>();
    }

    Vec2 vec2(const char* key) const { return to_vec2(at(key), child(key)); }
    Vec2 vec2(const char* key, const Vec2& fallback) const { return has(key) ? vec2(key) : fallback; }

    std::string child(const std::string& key) const { return where_ + "/" + key; }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const
    {
        throw ValidationError("field " + (key.empty() ? (where_.empty() ? "/" : where_) : child(key)) + ": " + msg);
    }

    static Vec2 to_vec2(const json& v, const std::string& where)
    {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ValidationError("field " + where + ": expected [number, number]");
        return {v[0].get<double>(), v[1].get<double>()};
    }

    // Bound entries may be null to mean unbounded.
    static Vec2 to_bound(const json& v, const std::string& where, double open)
    {
        if (!v.is_array() || v.size() != 2) throw ValidationError("field " + where + ": expected [bound, bound]");
        Vec2 out;
        for (int i = 0; i < 2; ++i) {
            if (v[i].is_null())
                out(i) = open;
            else if (v[i].is_number())
                out(i) = v[i].get<double>();
            else
                throw ValidationError("field " + where + ": bound must be a number or null");
        }
        return out;
    }

private:
    const json& j_;
    std::string where_;
};

json vec(const Vec2& v)
{
    return json::array({v.x(), v.y()});
}

json bound(const Vec2& v)
{
    json out = json::array();
    for (int i = 0; i < 2; ++i) out.push_back(std::isfinite(v(i)) ? json(v(i)) : json(nullptr));
    return out;
}

VehicleState read_state(ModelKind model, const json& j)
{
    const std::string where = "/initial_state";
    switch (model) {
    case ModelKind::Unicycle: {
        Fields f(j, where, {"x", "y", "theta", "v", "omega"});
        return UnicycleState{f.number("x"), f.number("y"), f.number("theta"), f.number("v", 0.0),
                             f.number("omega", 0.0)};
    }
    case ModelKind::Bicycle: {
        Fields f(j, where, {"x", "y", "theta", "v"});
        return BicycleState{f.number("x"), f.number("y"), f.number("theta"), f.number("v", 0.0)};
    }
    case ModelKind::PointMass: {
        Fields f(j, where, {"p", "v"});
        return PointMassState{f.vec2("p"), f.vec2("v", Vec2::Zero())};
    }
    }
    throw ValidationError("unknown model");
}

json write_state(const VehicleState& s)
{
    if (const auto* u = std::get_if<UnicycleState>(&s))
        return {{"x", u->x}, {"y", u->y}, {"theta", u->theta}, {"v", u->v}, {"omega", u->omega}};
    if (const auto* b = std::get_if<BicycleState>(&s)) return {{"x", b->x}, {"y", b->y}, {"theta", b->theta}, {"v", b->v}};
    const auto& pm = std::get<PointMassState>(s);
    return {{"p", vec(pm.p)}, {"v", vec(pm.v)}};
}

}  // namespace

Scenario scenario_from_json(const json& doc)
{
    Fields top(doc, "", {"name", "description", "model", "params", "initial_state", "obstacles", "controller", "filter",
                         "sim", "cbf", "hocbf_gamma1"});
    Scenario sc;
    sc.name = top.has("name") ? top.string("name") : std::string("scenario");
    try {
        sc.model = parse_model_kind(top.string("model"));
    } catch (const ValidationError& e) {
        top.fail("model", e.what());
    }
    if (top.has("cbf")) {
        try {
            sc.cbf = parse_cbf_kind(top.string("cbf"));
        } catch (const ValidationError& e) {
            top.fail("cbf", e.what());
        }
    }
    sc.hocbf_gamma1 = top.number("hocbf_gamma1", 1.0);

    if (top.has("params")) {
        Fields f(top.at("params"), "/params", {"l", "lf", "lr", "w", "beta_max", "v_max"});
        sc.params.l = f.number("l", sc.params.l);
        sc.params.lf = f.number("lf", sc.params.lf);
        sc.params.lr = f.number("lr", sc.params.lr);
        sc.params.w = f.number("w", sc.params.w);
        sc.params.beta_max = f.number("beta_max", sc.params.beta_max);
        sc.params.v_max = f.number("v_max", sc.params.v_max);
    }

    sc.initial = read_state(sc.model, top.at("initial_state"));

    if (top.has("obstacles")) {
        const json& arr = top.at("obstacles");
        if (!arr.is_array()) top.fail("obstacles", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "/obstacles/" + std::to_string(i);
            Fields f(arr[i], where, {"name", "center", "velocity", "c1", "c2", "segments"});
            ObstacleSpec o;
            o.name = f.has("name") ? f.string("name") : "obstacle" + std::to_string(i);
            o.initial.center = f.vec2("center");
            o.initial.velocity = f.vec2("velocity", Vec2::Zero());
            o.initial.c1 = f.number("c1");
            o.initial.c2 = f.number("c2");
            if (f.has("segments")) {
                const json& segs = f.at("segments");
                if (!segs.is_array()) f.fail("segments", "expected an array");
                for (std::size_t k = 0; k < segs.size(); ++k) {
                    Fields g(segs[k], where + "/segments/" + std::to_string(k), {"t_start", "velocity"});
                    o.segments.push_back({g.number("t_start"), g.vec2("velocity")});
                }
            }
            sc.obstacles.push_back(std::move(o));
        }
    }

    if (top.has("controller")) {
        Fields f(top.at("controller"), "/controller", {"k1", "k2", "v_des", "accel_limit", "heading_des", "path", "stanley"});
        ControllerSpec& c = sc.controller;
        c.gains.k1 = f.number("k1", c.gains.k1);
        c.gains.k2 = f.number("k2", c.gains.k2);
        c.gains.v_des = f.number("v_des", c.gains.v_des);
        if (f.has("accel_limit")) c.accel_limit = f.number("accel_limit");
        c.heading_des = f.number("heading_des", c.heading_des);
        if (f.has("path")) {
            Fields p(f.at("path"), "/controller/path", {"waypoints", "closed"});
            const json& wps = p.at("waypoints");
            if (!wps.is_array()) p.fail("waypoints", "expected an array of [x, y]");
            std::vector<Vec2> pts;
            for (std::size_t i = 0; i < wps.size(); ++i)
                pts.push_back(Fields::to_vec2(wps[i], "/controller/path/waypoints/" + std::to_string(i)));
            try {
                c.path = ReferencePath(std::move(pts), p.boolean("closed", false));
            } catch (const ValidationError& e) {
                throw ValidationError(std::string("field /controller/path: ") + e.what());
            }
        }
        if (f.has("stanley")) {
            Fields s(f.at("stanley"), "/controller/stanley", {"k_e", "v_floor", "max_steer"});
            c.stanley.k_e = s.number("k_e", c.stanley.k_e);
            c.stanley.v_floor = s.number("v_floor", c.stanley.v_floor);
            c.stanley.max_steer = s.number("max_steer", c.stanley.max_steer);
        }
    }

    if (top.has("filter")) {
        Fields f(top.at("filter"), "/filter", {"gamma", "activation_radius", "regularization_eps", "input_bounds"});
        sc.filter.gamma = f.number("gamma", sc.filter.gamma);
        sc.filter.activation_radius = f.number("activation_radius", kInf);
        sc.filter.regularization_eps = f.number("regularization_eps", sc.filter.regularization_eps);
        if (f.has("input_bounds")) {
            Fields b(f.at("input_bounds"), "/filter/input_bounds", {"lower", "upper"});
            InputBounds ib;
            if (b.has("lower")) ib.lower = Fields::to_bound(b.at("lower"), "/filter/input_bounds/lower", -kInf);
            if (b.has("upper")) ib.upper = Fields::to_bound(b.at("upper"), "/filter/input_bounds/upper", kInf);
            sc.filter.input_bounds = ib;
        }
    }

    {
        Fields f(top.at("sim"), "/sim", {"dt", "duration", "collision_slack", "max_degenerate_steps", "saturate_speed"});
        sc.dt = f.number("dt");
        sc.duration = f.number("duration");
        sc.collision_slack = f.number("collision_slack", sc.collision_slack);
        sc.max_degenerate_steps = f.count("max_degenerate_steps", sc.max_degenerate_steps);
        sc.saturate_speed = f.boolean("saturate_speed", sc.saturate_speed);
    }

    sc.validate();
    return sc;
}

json scenario_to_json(const Scenario& sc)
{
    json doc;
    doc["name"] = sc.name;
    doc["model"] = to_string(sc.model);
    doc["cbf"] = to_string(sc.cbf);
    doc["hocbf_gamma1"] = sc.hocbf_gamma1;

    json params = {{"l", sc.params.l}, {"lf", sc.params.lf}, {"lr", sc.params.lr}, {"w", sc.params.w},
                   {"beta_max", sc.params.beta_max}};
    if (std::isfinite(sc.params.v_max)) params["v_max"] = sc.params.v_max;
    doc["params"] = params;
    doc["initial_state"] = write_state(sc.initial);

    json obs = json::array();
    for (const auto& o : sc.obstacles) {
        json jo = {{"name", o.name}, {"center", vec(o.initial.center)}, {"velocity", vec(o.initial.velocity)},
                   {"c1", o.initial.c1}, {"c2", o.initial.c2}};
        if (!o.segments.empty()) {
            json segs = json::array();
            for (const auto& s : o.segments) segs.push_back({{"t_start", s.t_start}, {"velocity", vec(s.velocity)}});
            jo["segments"] = segs;
        }
        obs.push_back(jo);
    }
    doc["obstacles"] = obs;

    const ControllerSpec& c = sc.controller;
    json ctrl = {{"k1", c.gains.k1}, {"k2", c.gains.k2}, {"v_des", c.gains.v_des}, {"heading_des", c.heading_des}};
    if (c.accel_limit) ctrl["accel_limit"] = *c.accel_limit;
    if (c.path) {
        json wps = json::array();
        for (const auto& p : c.path->waypoints()) wps.push_back(vec(p));
        ctrl["path"] = {{"waypoints", wps}, {"closed", c.path->closed()}};
    }
    ctrl["stanley"] = {{"k_e", c.stanley.k_e}, {"v_floor", c.stanley.v_floor}, {"max_steer", c.stanley.max_steer}};
    doc["controller"] = ctrl;

    json filt = {{"gamma", sc.filter.gamma}, {"regularization_eps", sc.filter.regularization_eps}};
    if (std::isfinite(sc.filter.activation_radius)) filt["activation_radius"] = sc.filter.activation_radius;
    if (sc.filter.input_bounds)
        filt["input_bounds"] = {{"lower", bound(sc.filter.input_bounds->lower)}, {"upper", bound(sc.filter.input_bounds->upper)}};
    doc["filter"] = filt;

    doc["sim"] = {{"dt", sc.dt},
                  {"duration", sc.duration},
                  {"collision_slack", sc.collision_slack},
                  {"max_degenerate_steps", sc.max_degenerate_steps},
                  {"saturate_speed", sc.saturate_speed}};
    return doc;
}

Scenario parse_scenario(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line:column.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream os;
        os << "syntax error at line " << line << ", column " << col << ": " << e.what();
        throw ValidationError(os.str());
    }
    return scenario_from_json(doc);
}

Scenario load_scenario_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read scenario file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

json summary_to_json(const TrajectoryLog& log)
{
    const SafetySummary m = safety_metrics(log);
    auto finite_or_null = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };

    json labels = json::array();
    for (Behavior b : classify_behavior(log)) labels.push_back(to_string(b));
    json clearance = json::array();
    for (double c : m.min_clearance) clearance.push_back(finite_or_null(c));

    json out;
    out["scenario"] = log.scenario;
    out["model"] = to_string(log.model);
    out["cbf"] = to_string(log.cbf);
    out["verdict"] = log.collision ? "collision" : "safe";
    out["collision_step"] = log.collision_step ? json(*log.collision_step) : json(nullptr);
    out["records"] = log.records.size();
    out["dt"] = log.dt;
    out["gamma"] = log.gamma;
    out["behaviors"] = labels;
    out["min_clearance"] = clearance;
    out["min_h"] = finite_or_null(m.min_h);
    out["active_fraction"] = m.active_fraction;
    out["max_u_safe"] = m.max_u_safe;
    out["max_abs_beta"] = m.max_abs_beta ? json(*m.max_abs_beta) : json(nullptr);
    const auto engaged = first_active_step(log);
    out["filter_engaged_t"] = engaged ? json(log.records[*engaged].t) : json(nullptr);
    out["heading_change_deg"] = engaged ? json(max_heading_change(log, *engaged) * 180.0 / std::numbers::pi) : json(0.0);
    out["events"] = {{"degenerate_steps", log.events.degenerate},
                     {"infeasible_steps", log.events.infeasible},
                     {"bounds_binding_steps", log.events.bounds_binding},
                     {"penetration_samples", log.events.penetration}};
    out["classifier_thresholds"] = {{"turn_deg", kTurnThresholdDeg},
                                    {"brake_speed_fraction", kBrakeSpeedFraction},
                                    {"reverse_speed_tol", kReverseSpeedTol},
                                    {"overtake_alignment_cos", kOvertakeAlignment}};
    return out;
}

}  // namespace c3bf

#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "c3bf/scenario_io.hpp"
#include "c3bf/svg_plot.hpp"
#include "c3bf/trajectory_csv.hpp"

namespace c3bf::cli {

namespace fs = std::filesystem;

namespace {

void apply(Scenario& sc, const Overrides& o)
{
    if (o.dt) sc.dt = *o.dt;
    if (o.duration) sc.duration = *o.duration;
    if (o.gamma) sc.filter.gamma = *o.gamma;
    sc.validate();
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f) throw ValidationError("failed writing '" + path.string() + "'");
}

struct RunOutcome {
    int code = kExitOk;
    std::string message;
    std::string name;
    std::string labels;
    std::string min_clearance;
    std::string min_h;
    std::string active_fraction;
};

// Runs one scenario into out_dir. Every failure is mapped onto the exit-code contract.
RunOutcome simulate_into(const fs::path& scenario_path, const fs::path& out_dir, const Overrides& overrides,
                         const std::optional<std::string>& plot_mode)
{
    RunOutcome r;
    r.name = scenario_path.stem().string();
    try {
        Scenario sc = load_scenario_file(scenario_path);
        apply(sc, overrides);
        if (!sc.name.empty()) r.name = sc.name;
        std::optional<PlotMode> mode;
        if (plot_mode) mode = parse_plot_mode(*plot_mode);

        const TrajectoryLog log = run_scenario(sc);
        fs::create_directories(out_dir);

        std::ostringstream csv;
        write_trajectory_csv(csv, log);
        write_text(out_dir / "trajectory.csv", csv.str());
        write_text(out_dir / "summary.json", summary_to_json(log).dump(2) + "\n");
        if (mode) {
            std::istringstream in(csv.str());
            write_text(out_dir / "plot.svg", render_svg(read_trajectory_csv(in), *mode));
        }

        const SafetySummary m = safety_metrics(log);
        for (Behavior b : classify_behavior(log)) r.labels += (r.labels.empty() ? "" : ";") + std::string(to_string(b));
        double clearance = kInf;
        for (double c : m.min_clearance) clearance = std::min(clearance, c);
        r.min_clearance = std::isfinite(clearance) ? format_number(clearance) : "";
        r.min_h = std::isfinite(m.min_h) ? format_number(m.min_h) : "";
        r.active_fraction = format_number(m.active_fraction);
        if (log.collision) {
            r.code = kExitUnsafe;
            r.message = "collision at t = " + format_number(log.records.back().t);
        } else {
            r.message = "safe";
        }
    } catch (const SimulationError& e) {
        r.code = kExitUnsafe;
        r.message = std::string("simulation aborted: ") + e.what();
    } catch (const std::exception& e) {
        r.code = kExitInvalid;
        r.message = e.what();
    }
    return r;
}

std::string csv_cell(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err)
{
    const RunOutcome r = simulate_into(opt.scenario, opt.out_dir, opt.overrides, opt.plot_mode);
    (r.code == kExitInvalid ? err : out) << r.name << ": " << r.message << '\n';
    return r.code;
}

int cmd_batch(const fs::path& dir, const fs::path& out_dir, const Overrides& overrides, std::ostream& out,
              std::ostream& err)
{
    std::vector<fs::path> files;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        err << "batch: '" << dir.string() << "' is not a directory\n";
        return kExitInvalid;
    }
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        err << "batch: no scenario files (*.json) in '" << dir.string() << "'\n";
        return kExitInvalid;
    }

    std::vector<RunOutcome> results(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++)
            results[i] = simulate_into(files[i], out_dir / files[i].stem(), overrides, std::nullopt);
    };
    const std::size_t n_threads =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, files.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    int worst = kExitOk;
    std::ostringstream report;
    report << "scenario,file,exit_code,labels,min_clearance,min_h,active_fraction,message\n";
    for (std::size_t i = 0; i < files.size(); ++i) {
        const RunOutcome& r = results[i];
        worst = std::max(worst, r.code);
        report << csv_cell(r.name) << ',' << csv_cell(files[i].filename().string()) << ',' << r.code << ','
               << r.labels << ',' << r.min_clearance << ',' << r.min_h << ',' << r.active_fraction << ','
               << csv_cell(r.message) << '\n';
        (r.code == kExitInvalid ? err : out) << r.name << ": " << r.message << '\n';
    }
    try {
        fs::create_directories(out_dir);
        write_text(out_dir / "report.csv", report.str());
    } catch (const std::exception& e) {
        err << "batch: " << e.what() << '\n';
        return kExitInvalid;
    }
    return worst;
}

int cmd_plot(const fs::path& csv, const fs::path& svg, const std::string& mode, std::ostream& err)
{
    try {
        const PlotMode m = parse_plot_mode(mode);
        std::ifstream in(csv, std::ios::binary);
        if (!in) throw ValidationError("cannot open '" + csv.string() + "'");
        const TrajectoryTable table = read_trajectory_csv(in);
        if (svg.has_parent_path()) fs::create_directories(svg.parent_path());
        write_text(svg, render_svg(table, m));
        return kExitOk;
    } catch (const std::exception& e) {
        err << "plot: " << e.what() << '\n';
        return kExitInvalid;
    }
}

int cmd_validate(const fs::path& scenario, std::ostream& out, std::ostream& err)
{
    try {
        const Scenario sc = load_scenario_file(scenario);
        out << scenario.string() << ": ok (" << to_string(sc.model) << ", " << sc.obstacles.size() << " obstacles, "
            << sc.step_count() << " steps)\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << scenario.string() << ": " << e.what() << '\n';
        return kExitInvalid;
    }
}

int run(int argc, char** argv)
{
    CLI::App app{"Collision-cone barrier safety filter: simulate, batch, plot and validate scenarios"};
    app.require_subcommand(1);

    Overrides ov;
    auto add_overrides = [&ov](CLI::App* sub) {
        sub->add_option("--dt", ov.dt, "Override the integration step [s]");
        sub->add_option("--duration", ov.duration, "Override the horizon [s]");
        sub->add_option("--gamma", ov.gamma, "Override the class-K gain");
    };

    SimulateOptions sim;
    std::string sim_mode;
    auto* simulate = app.add_subcommand("simulate", "Run one scenario");
    simulate->add_option("--scenario", sim.scenario, "Scenario JSON file")->required();
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();
    simulate->add_option("--mode", sim_mode, "Also write plot.svg in this mode (path | hvalue | inputs)");
    add_overrides(simulate);

    fs::path batch_dir, batch_out;
    auto* batch = app.add_subcommand("batch", "Run every *.json scenario in a directory");
    batch->add_option("--scenario,dir", batch_dir, "Scenario directory")->required();
    batch->add_option("--out", batch_out, "Output directory")->required();
    add_overrides(batch);

    fs::path plot_csv, plot_svg;
    std::string plot_mode = "path";
    auto* plot = app.add_subcommand("plot", "Render a trajectory CSV as SVG");
    plot->add_option("--csv,csv", plot_csv, "Trajectory CSV")->required();
    plot->add_option("--out", plot_svg, "Output SVG file")->required();
    plot->add_option("--mode", plot_mode, "path | hvalue | inputs");

    fs::path validate_path;
    auto* validate = app.add_subcommand("validate", "Check a scenario file against the schema");
    validate->add_option("--scenario,scenario", validate_path, "Scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    if (simulate->parsed()) {
        sim.overrides = ov;
        if (!sim_mode.empty()) sim.plot_mode = sim_mode;
        return cmd_simulate(sim, std::cout, std::cerr);
    }
    if (batch->parsed()) return cmd_batch(batch_dir, batch_out, ov, std::cout, std::cerr);
    if (plot->parsed()) return cmd_plot(plot_csv, plot_svg, plot_mode, std::cerr);
    return cmd_validate(validate_path, std::cout, std::cerr);
}

}  // namespace c3bf::cli

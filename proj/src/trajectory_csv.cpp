#include "c3bf/trajectory_csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "c3bf/vehicle_models.hpp"

namespace c3bf {

namespace {

constexpr std::array<const char*, 8> kObstacleFields = {"h", "psi", "dist", "active", "penetration", "cx", "cy", "r"};

std::vector<std::string> state_columns(ModelKind m)
{
    switch (m) {
    case ModelKind::Unicycle: return {"x", "y", "theta", "v", "omega"};
    case ModelKind::Bicycle: return {"x", "y", "theta", "v"};
    case ModelKind::PointMass: return {"px", "py", "vx", "vy"};
    }
    return {};
}

std::array<const char*, 2> input_suffix(ModelKind m)
{
    switch (m) {
    case ModelKind::Unicycle: return {"a", "alpha"};
    case ModelKind::Bicycle: return {"a", "beta"};
    case ModelKind::PointMass: return {"ax", "ay"};
    }
    return {"0", "1"};
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string format_number(double x)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

std::vector<std::string> trajectory_columns(ModelKind model, std::size_t n_obstacles)
{
    std::vector<std::string> cols{"t"};
    for (auto& c : state_columns(model)) cols.push_back(c);
    const auto suf = input_suffix(model);
    for (const char* prefix : {"u_ref_", "u_star_"})
        for (const char* s : suf) cols.push_back(std::string(prefix) + s);
    for (std::size_t i = 0; i < n_obstacles; ++i)
        for (const char* f : kObstacleFields) cols.push_back("o" + std::to_string(i) + "_" + f);
    return cols;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log)
{
    const std::size_t n_obs = log.records.empty() ? 0 : log.records.front().obstacles.size();
    const auto cols = trajectory_columns(log.model, n_obs);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    std::string line;
    for (const auto& rec : log.records) {
        line.clear();
        auto put = [&line](double x) {
            if (!line.empty()) line += ',';
            line += format_number(x);
        };
        auto flag = [&line](bool b) { line += b ? ",1" : ",0"; };
        put(rec.t);
        const Eigen::VectorXd x = to_vector(rec.state);
        for (Eigen::Index i = 0; i < x.size(); ++i) put(x(i));
        put(rec.u_ref(0));
        put(rec.u_ref(1));
        put(rec.u_star(0));
        put(rec.u_star(1));
        for (const auto& o : rec.obstacles) {
            put(o.h);
            put(o.psi);
            put(o.dist);
            flag(o.active);
            flag(o.penetration);
            put(o.center.x());
            put(o.center.y());
            put(o.r);
        }
        out << line << '\n';
    }
}

std::size_t TrajectoryTable::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ValidationError("trajectory csv: no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> TrajectoryTable::series(const std::string& name) const
{
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

TrajectoryTable read_trajectory_csv(std::istream& in)
{
    TrajectoryTable table;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("trajectory csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.columns = split(line);

    bool matched = false;
    for (ModelKind m : {ModelKind::Unicycle, ModelKind::Bicycle, ModelKind::PointMass}) {
        const std::size_t base = trajectory_columns(m, 0).size();
        if (table.columns.size() < base || (table.columns.size() - base) % kObstacleFields.size() != 0) continue;
        const std::size_t n_obs = (table.columns.size() - base) / kObstacleFields.size();
        if (trajectory_columns(m, n_obs) == table.columns) {
            table.model = m;
            table.n_obstacles = n_obs;
            matched = true;
            break;
        }
    }
    if (!matched) throw ValidationError("trajectory csv: unknown column layout in header '" + line + "'");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != table.columns.size())
            throw ValidationError("trajectory csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(table.columns.size()));
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const char* b = cells[i].data();
            const char* e = b + cells[i].size();
            const auto res = std::from_chars(b, e, row[i]);
            if (res.ec != std::errc{} || res.ptr != e)
                throw ValidationError("trajectory csv: line " + std::to_string(line_no) + ", column '" +
                                      table.columns[i] + "' is not a number");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace c3bf

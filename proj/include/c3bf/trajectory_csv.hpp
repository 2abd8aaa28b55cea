#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "c3bf/sim_engine.hpp"

namespace c3bf {

/// Column layout:
///   t, <state columns>, u_ref_<c0>, u_ref_<c1>, u_star_<c0>, u_star_<c1>,
///   then per obstacle i: o<i>_h, o<i>_psi, o<i>_dist, o<i>_active, o<i>_penetration,
///   o<i>_cx, o<i>_cy, o<i>_r
/// State columns: unicycle x,y,theta,v,omega; bicycle x,y,theta,v; pointmass px,py,vx,vy.
/// Input suffixes: unicycle a,alpha; bicycle a,beta; pointmass ax,ay.
/// Numbers use 17 significant digits in the C locale; flags are 0/1.
std::vector<std::string> trajectory_columns(ModelKind model, std::size_t n_obstacles);

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);

/// Parsed trajectory file with the layout recovered from the header.
struct TrajectoryTable {
    ModelKind model = ModelKind::Unicycle;
    std::size_t n_obstacles = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;  // throws ValidationError if absent
    std::vector<double> series(const std::string& name) const;
};

/// Throws ValidationError when the header does not match the layout above or a cell is
/// not a number.
TrajectoryTable read_trajectory_csv(std::istream& in);

/// Locale-independent shortest-exact text for a double.
std::string format_number(double x);

}  // namespace c3bf

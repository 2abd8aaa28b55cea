#pragma once

#include <optional>
#include <span>
#include <vector>

#include "c3bf/cone_cbf.hpp"
#include "c3bf/types.hpp"

namespace c3bf {

struct InputBounds {
    Vec2 lower = Vec2::Constant(-kInf);
    Vec2 upper = Vec2::Constant(kInf);
};

struct FilterConfig {
    double gamma = 1.0;                 // linear class-K gain: kappa(h) = gamma h
    double activation_radius = kInf;    // perception boundary
    double regularization_eps = 1e-10;  // |lgh| at or below this is a singular direction
    std::optional<InputBounds> input_bounds;

    void validate() const;
};

struct FilterResult {
    ControlInput u_star = ControlInput::Zero();
    ControlInput u_safe = ControlInput::Zero();  // u_star - u_ref
    std::vector<std::size_t> active_set;         // indices into the barrier list
    std::vector<double> psi;                     // lfh + lgh u_ref + gamma h, per barrier
    bool degenerate = false;                     // some violated barrier had |lgh| <= eps
    bool infeasible = false;                     // constraint intersection was empty
    bool bounds_binding = false;                 // an input bound is active at u_star
};

/// a . u >= b
struct LinearConstraint {
    Vec2 a = Vec2::Zero();
    double b = 0.0;
};

struct QpSolution {
    Vec2 u = Vec2::Zero();
    std::vector<std::size_t> active;  // indices into the constraint list
    bool feasible = true;
};

/// argmin |u - u_ref|^2 subject to the given half-planes. Dual active-set iteration
/// starting from the unconstrained minimizer. When the intersection is empty, returns the
/// minimizer of the summed squared violations (closest to u_ref among ties) with
/// feasible = false.
QpSolution solve_min_distance_qp(const Vec2& u_ref, std::span<const LinearConstraint> constraints);

/// Closed-form single-barrier filter (switching law).
FilterResult filter_single(const ControlInput& u_ref, const CbfEvaluation& e, const FilterConfig& cfg);

/// Stacks every barrier (plus optional input box) into one QP.
FilterResult filter_qp(const ControlInput& u_ref, std::span<const CbfEvaluation> evals, const FilterConfig& cfg);

/// A barrier participates iff the obstacle lies within the perception boundary.
bool activation_gate(double dist, const FilterConfig& cfg);

}  // namespace c3bf

#include "c3bf/safety_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace c3bf {

namespace {

constexpr double kViolationTol = 1e-12;
constexpr double kDirectionTol = 1e-14;
constexpr double kTieTol = 1e-12;

double slack(const LinearConstraint& c, const Vec2& u)
{
    return c.a.dot(u) - c.b;
}

bool violated(const LinearConstraint& c, const Vec2& u)
{
    return slack(c, u) < -kViolationTol * (1.0 + std::abs(c.b));
}

// Minimizes sum of squared violations plus a tiny pull toward u_ref. Semi-smooth Newton on
// a convex piecewise quadratic; the violated set settles in a handful of iterations.
Vec2 least_violation(const Vec2& u_ref, std::span<const LinearConstraint> cs)
{
    constexpr double mu = 1e-9;
    Vec2 u = u_ref;
    std::vector<bool> prev;
    for (int iter = 0; iter < 64; ++iter) {
        std::vector<bool> set(cs.size());
        Eigen::Matrix2d H = mu * Eigen::Matrix2d::Identity();
        Vec2 rhs = mu * u_ref;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            set[i] = slack(cs[i], u) < 0.0;
            if (!set[i]) continue;
            H += cs[i].a * cs[i].a.transpose();
            rhs += cs[i].a * cs[i].b;
        }
        if (set == prev) break;
        prev = set;
        u = H.ldlt().solve(rhs);
    }
    return u;
}

}  // namespace

QpSolution solve_min_distance_qp(const Vec2& u_ref, std::span<const LinearConstraint> cs)
{
    QpSolution sol;
    Vec2 x = u_ref;
    std::vector<std::size_t> active;
    std::vector<double> lambda;

    const std::size_t max_outer = 8 * (cs.size() + 2);
    for (std::size_t outer = 0; outer < max_outer; ++outer) {
        // Most violated constraint not yet in the working set.
        std::size_t p = cs.size();
        double worst = 0.0;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (std::find(active.begin(), active.end(), i) != active.end()) continue;
            if (!violated(cs[i], x)) continue;
            const double s = slack(cs[i], x) / std::max(cs[i].a.norm(), 1e-300);
            if (p == cs.size() || s < worst) {
                p = i;
                worst = s;
            }
        }
        if (p == cs.size()) {
            sol.u = x;
            sol.active = active;
            return sol;
        }

        const Vec2& np = cs[p].a;
        double lambda_p = 0.0;
        bool added = false;
        while (!added) {
            const std::size_t q = active.size();
            Vec2 z = np;
            Eigen::VectorXd r(q);
            if (q > 0) {
                Eigen::Matrix<double, 2, Eigen::Dynamic> N(2, q);
                for (std::size_t j = 0; j < q; ++j) N.col(j) = cs[active[j]].a;
                r = (N.transpose() * N).ldlt().solve(N.transpose() * np);
                z = np - N * r;
            }

            // Partial step: largest dual move before an active multiplier hits zero.
            double t1 = kInf;
            std::size_t k = q;
            for (std::size_t j = 0; j < q; ++j) {
                if (r(j) > 0.0) {
                    const double tj = lambda[j] / r(j);
                    if (tj < t1) {
                        t1 = tj;
                        k = j;
                    }
                }
            }
            // Full step: primal move that makes constraint p tight.
            double t2 = kInf;
            const double zz = z.squaredNorm();
            if (zz > kDirectionTol * std::max(1.0, np.squaredNorm())) t2 = -slack(cs[p], x) / zz;

            if (!std::isfinite(t1) && !std::isfinite(t2)) {
                sol.feasible = false;
                sol.u = least_violation(u_ref, cs);
                for (std::size_t i = 0; i < cs.size(); ++i)
                    if (std::abs(slack(cs[i], sol.u)) <= 1e-9 * (1.0 + std::abs(cs[i].b))) sol.active.push_back(i);
                return sol;
            }

            const double t = std::min(t1, t2);
            if (std::isfinite(t2)) x += t * z;
            for (std::size_t j = 0; j < q; ++j) lambda[j] -= t * r(j);
            lambda_p += t;

            if (std::isfinite(t2) && t2 <= t1 + kTieTol * std::max(1.0, std::abs(t1))) {
                active.push_back(p);
                lambda.push_back(lambda_p);
                added = true;
            } else {
                active.erase(active.begin() + static_cast<std::ptrdiff_t>(k));
                lambda.erase(lambda.begin() + static_cast<std::ptrdiff_t>(k));
            }
        }
    }
    // Cycling guard; not expected for a strictly convex objective.
    sol.u = x;
    sol.active = active;
    return sol;
}

void FilterConfig::validate() const
{
    if (!(gamma > 0.0 && std::isfinite(gamma))) throw ValidationError("filter: gamma must be > 0");
    if (!(activation_radius > 0.0)) throw ValidationError("filter: activation_radius must be > 0");
    if (!(regularization_eps > 0.0)) throw ValidationError("filter: regularization_eps must be > 0");
    if (input_bounds) {
        for (int i = 0; i < 2; ++i)
            if (!(input_bounds->lower(i) <= input_bounds->upper(i)))
                throw ValidationError("filter: input bounds need lower <= upper");
    }
}

bool activation_gate(double dist, const FilterConfig& cfg)
{
    return dist <= cfg.activation_radius;
}

FilterResult filter_single(const ControlInput& u_ref, const CbfEvaluation& e, const FilterConfig& cfg)
{
    FilterResult res;
    const double psi = e.lfh + e.lgh.dot(u_ref) + cfg.gamma * e.h;
    res.psi.push_back(psi);
    res.u_star = u_ref;
    if (psi < 0.0) {
        const double g2 = e.lgh.squaredNorm();
        if (std::sqrt(g2) <= cfg.regularization_eps) {
            res.degenerate = true;
        } else {
            res.u_safe = -e.lgh * psi / g2;
            res.u_star = u_ref + res.u_safe;
            res.active_set.push_back(0);
        }
    }
    return res;
}

FilterResult filter_qp(const ControlInput& u_ref, std::span<const CbfEvaluation> evals, const FilterConfig& cfg)
{
    FilterResult res;
    std::vector<LinearConstraint> cs;
    std::vector<std::size_t> source;  // barrier index, or npos for an input bound
    constexpr std::size_t kBound = std::numeric_limits<std::size_t>::max();

    for (std::size_t i = 0; i < evals.size(); ++i) {
        const CbfEvaluation& e = evals[i];
        const double offset = e.lfh + cfg.gamma * e.h;
        res.psi.push_back(offset + e.lgh.dot(u_ref));
        if (e.lgh.norm() <= cfg.regularization_eps) {
            if (offset < 0.0) res.degenerate = true;  // no input can repair this barrier
            continue;
        }
        cs.push_back({e.lgh, -offset});
        source.push_back(i);
    }
    if (cfg.input_bounds) {
        for (int k = 0; k < 2; ++k) {
            const Vec2 unit = Vec2::Unit(k);
            if (std::isfinite(cfg.input_bounds->lower(k))) {
                cs.push_back({unit, cfg.input_bounds->lower(k)});
                source.push_back(kBound);
            }
            if (std::isfinite(cfg.input_bounds->upper(k))) {
                cs.push_back({-unit, -cfg.input_bounds->upper(k)});
                source.push_back(kBound);
            }
        }
    }

    QpSolution sol = solve_min_distance_qp(u_ref, cs);
    if (!sol.feasible && cfg.input_bounds) {
        // Input bounds are physical limits; only barrier violation is traded off.
        const Vec2 clamped = sol.u.cwiseMax(cfg.input_bounds->lower).cwiseMin(cfg.input_bounds->upper);
        if (clamped != sol.u) {
            sol.u = clamped;
            sol.active.clear();
            for (std::size_t i = 0; i < cs.size(); ++i)
                if (std::abs(slack(cs[i], sol.u)) <= 1e-9 * (1.0 + std::abs(cs[i].b))) sol.active.push_back(i);
        }
    }
    res.u_star = sol.u;
    res.u_safe = sol.u - u_ref;
    res.infeasible = !sol.feasible;
    for (std::size_t idx : sol.active) {
        if (source[idx] == kBound)
            res.bounds_binding = true;
        else
            res.active_set.push_back(source[idx]);
    }
    std::sort(res.active_set.begin(), res.active_set.end());
    if (res.active_set.empty() && !res.bounds_binding && !res.infeasible) {
        res.u_star = u_ref;
        res.u_safe.setZero();
    }
    return res;
}

}  // namespace c3bf

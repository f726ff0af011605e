#include "secalloc/wst_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "secalloc/rate_model.hpp"

namespace secalloc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double vec_sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void require_feasible(const std::vector<double>& v, double cap, const char* what) {
    for (double x : v)
        if (!(x >= -1e-12 * cap)) throw ValidationError(what, "component must be >= 0");
    if (!(vec_sum(v) <= cap * (1.0 + 1e-9)))
        throw ValidationError(what, "exceeds its budget");
}

}  // namespace

StepOutcome backtracked_step(const StepperKind& kind, const std::vector<double>& y,
                             const ObjectiveFn& objective, const GradientFn& analytic_grad,
                             const StepConfig& cfg, const ArmijoConfig& armijo,
                             const ProjectionFn& project) {
    GradientFn oracle = analytic_grad;
    if (kind.wants_objective_differences())
        oracle = [&objective, cfg, scheme = kind.scheme](const Point& at) {
            return fd_gradient(objective, at, cfg, scheme);
        };

    const double value_y = objective(y);
    const Point grad_y = oracle(y);

    const auto prediction = [&](const Point& cand) {
        double predicted = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) predicted += grad_y[i] * (cand[i] - y[i]);
        return predicted;
    };
    const auto accepted = [&](const Point& cand, double value_cand) {
        return std::isfinite(value_cand) &&
               value_cand >= value_y + armijo.sufficient_increase *
                                           std::max(0.0, prediction(cand));
    };

    StepConfig trial = cfg;
    int grows_left = 60;
    bool shrunk = false;
    for (int bt = 0; bt <= armijo.max_backtracks; ++bt) {
        Point cand = grad_step(kind, y, oracle, trial, project);
        double value_cand = objective(cand);
        if (accepted(cand, value_cand)) {
            // Forward tracking: when the nominal step is accepted outright,
            // keep doubling h while that strictly helps. Gradients can be
            // orders of magnitude smaller than the variable scale (the
            // power minimizer's are), and this finds the productive step
            // size without abandoning the h-then-shrink policy.
            while (!shrunk && grows_left-- > 0) {
                StepConfig wider = trial;
                wider.h = trial.h * 2.0;
                Point next = grad_step(kind, y, oracle, wider, project);
                const double value_next = objective(next);
                if (!accepted(next, value_next) || value_next <= value_cand) break;
                trial = wider;
                cand = std::move(next);
                value_cand = value_next;
            }
            bool moved = false;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (cand[i] != y[i]) moved = true;
            return {cand, moved};
        }
        // Bisection-backed objectives are quantized: a step that predicts
        // ascent but registers no change at all is below the objective's
        // resolution, so widen instead of shrinking.
        if (!shrunk && value_cand == value_y && cand != y && prediction(cand) > 0.0 &&
            grows_left-- > 0) {
            trial.h *= 2.0;
            --bt;
            continue;
        }
        trial.h *= armijo.shrink;
        shrunk = true;
    }
    return {y, false};
}

namespace {

// Shared linearize-then-ascend loop for both blocks. `freeze` captures the
// penalty slopes at the incoming point and returns the frozen surrogate
// (objective, analytic gradient) pair.
struct FrozenSurrogate {
    ObjectiveFn objective;
    GradientFn gradient;
};

BlockSolveResult linearized_ascent(std::vector<double> x, double cap, const SolverConfig& cfg,
                                   const StepperKind& kind,
                                   const std::function<FrozenSurrogate(const std::vector<double>&)>& freeze) {
    StepConfig scaled = cfg.step;
    scaled.h = cfg.step.h * cap;
    scaled.fd_spacing = cfg.step.fd_spacing * cap;
    scaled.direction = StepDirection::Ascent;
    const ProjectionFn project = [cap](const Point& v) { return project_capped_simplex(v, cap); };

    BlockSolveResult result;
    for (int i = 0; i < cfg.max_inner; ++i) {
        const FrozenSurrogate sur = freeze(x);
        const double before = sur.objective(x);
        StepOutcome step = backtracked_step(kind, x, sur.objective, sur.gradient, scaled,
                                            cfg.armijo, project);
        const double after = sur.objective(step.x);

        result.surrogate_before.push_back(before);
        result.surrogate_after.push_back(after);
        ++result.iterations;
        x = std::move(step.x);

        if (!step.moved) break;
        if (std::abs(after - before) <=
            cfg.inner_tol * std::max(std::abs(before), std::numeric_limits<double>::min()))
            break;
    }
    result.x = std::move(x);
    return result;
}

}  // namespace

std::vector<double> project_capped_simplex(const std::vector<double>& x, double cap) {
    if (!(cap > 0.0)) throw DomainError("project_capped_simplex: cap must be > 0");

    std::vector<double> clipped(x.size());
    double clipped_sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        clipped[i] = std::max(0.0, x[i]);
        clipped_sum += clipped[i];
    }
    if (clipped_sum <= cap) return clipped;

    // The cap is active: v_i = max(0, x_i - tau) with tau chosen so the
    // projection sums to cap. Scan the sorted prefix for the active set.
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double prefix = 0.0;
    double tau = (vec_sum(sorted) - cap) / static_cast<double>(sorted.size());
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        prefix += sorted[j];
        const double candidate = (prefix - cap) / static_cast<double>(j + 1);
        if ((j + 1 == sorted.size() || candidate >= sorted[j + 1]) && sorted[j] > candidate) {
            tau = candidate;
            break;
        }
    }
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(0.0, x[i] - tau);
    return out;
}

double weighted_sum_throughput(const Allocation& alloc, const Scenario& sc) {
    if (alloc.p_w.size() != sc.devices.size() || alloc.n_units.size() != sc.devices.size())
        throw ValidationError("allocation", "length mismatch with scenario");
    double total = 0.0;
    for (std::size_t k = 0; k < sc.devices.size(); ++k) {
        if (!(alloc.p_w[k] > 0.0) || !(alloc.n_units[k] > 0.0)) continue;
        const double bits =
            total_bits(alloc.p_w[k], alloc.n_units[k], LinkParams::make(sc, static_cast<int>(k)));
        total += sc.devices[k].weight * std::max(0.0, bits);
    }
    return total;
}

BlockSolveResult solve_power_block(const Scenario& sc, const std::vector<double>& n_fixed,
                                   const std::vector<double>& p0, const SolverConfig& cfg,
                                   const StepperKind& kind) {
    const std::size_t K = sc.devices.size();
    if (n_fixed.size() != K || p0.size() != K)
        throw ValidationError("solve_power_block", "vector length mismatch");
    for (double n : n_fixed)
        if (!(n > 0.0))
            throw ValidationError("solve_power_block", "n_fixed must be strictly positive");
    require_feasible(n_fixed, sc.sys.n_max, "solve_power_block.n_fixed");
    require_feasible(p0, sc.p_max_w, "solve_power_block.p0");

    std::vector<PowerSection> ctx;
    ctx.reserve(K);
    for (std::size_t k = 0; k < K; ++k)
        ctx.push_back(PowerSection::make(sc, static_cast<int>(k), n_fixed[k]));

    const auto freeze = [&](const std::vector<double>& p) {
        std::vector<double> slope(K);
        for (std::size_t k = 0; k < K; ++k) slope[k] = power_penalty_deriv(p[k], ctx[k]);
        FrozenSurrogate sur;
        sur.objective = [&, slope](const Point& q) {
            // difference-quotient probes may poke below zero; clamp there
            double s = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const double p = std::max(q[k], 0.0);
                s += sc.devices[k].weight *
                     (power_parts(p, ctx[k]).capacity - slope[k] * p);
            }
            return s;
        };
        sur.gradient = [&, slope](const Point& q) {
            Point g(K);
            for (std::size_t k = 0; k < K; ++k)
                g[k] = sc.devices[k].weight * (power_capacity_deriv(q[k], ctx[k]) - slope[k]);
            return g;
        };
        return sur;
    };

    return linearized_ascent(p0, sc.p_max_w, cfg, kind, freeze);
}

BlockSolveResult solve_bandwidth_block(const Scenario& sc, const std::vector<double>& p_fixed,
                                       const std::vector<double>& n0, const SolverConfig& cfg,
                                       const StepperKind& kind) {
    const std::size_t K = sc.devices.size();
    if (p_fixed.size() != K || n0.size() != K)
        throw ValidationError("solve_bandwidth_block", "vector length mismatch");
    for (double n : n0)
        if (!(n > 0.0))
            throw ValidationError("solve_bandwidth_block", "n0 must be strictly positive");
    require_feasible(p_fixed, sc.p_max_w, "solve_bandwidth_block.p_fixed");
    require_feasible(n0, sc.sys.n_max, "solve_bandwidth_block.n0");

    std::vector<BandwidthSection> ctx;
    ctx.reserve(K);
    for (std::size_t k = 0; k < K; ++k)
        ctx.push_back(BandwidthSection::make(sc, static_cast<int>(k), p_fixed[k]));

    const auto freeze = [&](const std::vector<double>& n) {
        std::vector<double> slope(K);
        for (std::size_t k = 0; k < K; ++k) slope[k] = bandwidth_penalty_deriv(n[k], ctx[k]);
        FrozenSurrogate sur;
        sur.objective = [&, slope](const Point& q) {
            double s = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                s += sc.devices[k].weight *
                     (bandwidth_parts(q[k], ctx[k]).capacity - slope[k] * q[k]);
            return s;
        };
        sur.gradient = [&, slope](const Point& q) {
            Point g(K);
            for (std::size_t k = 0; k < K; ++k)
                g[k] = sc.devices[k].weight *
                       (bandwidth_capacity_deriv(q[k], ctx[k]) - slope[k]);
            return g;
        };
        return sur;
    };

    return linearized_ascent(n0, static_cast<double>(sc.sys.n_max), cfg, kind, freeze);
}

std::vector<int> round_bandwidth(const std::vector<double>& n_relaxed, const Scenario& sc,
                                 const std::vector<double>& p_w) {
    const std::size_t K = sc.devices.size();
    if (n_relaxed.size() != K || p_w.size() != K)
        throw ValidationError("round_bandwidth", "vector length mismatch");
    if (static_cast<int>(K) > sc.sys.n_max)
        throw InfeasibleError("round_bandwidth: more devices than bandwidth units");
    require_feasible(n_relaxed, sc.sys.n_max, "round_bandwidth.n_relaxed");

    const auto bits_at = [&](std::size_t k, int units) {
        return units <= 0 ? 0.0
                          : sc.devices[k].weight *
                                total_bits(p_w[k], units, LinkParams::make(sc, static_cast<int>(k)));
    };

    std::vector<int> units(K);
    int total = 0;
    for (std::size_t k = 0; k < K; ++k) {
        units[k] = std::max(1, static_cast<int>(std::floor(n_relaxed[k] + 1e-9)));
        total += units[k];
    }

    // The minimum-one rule can overshoot the cap; shed the cheapest units.
    while (total > sc.sys.n_max) {
        std::size_t shed = K;
        double best_loss = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            if (units[k] <= 1) continue;
            const double loss = bits_at(k, units[k]) - bits_at(k, units[k] - 1);
            if (loss < best_loss) {
                best_loss = loss;
                shed = k;
            }
        }
        if (shed == K)
            throw InfeasibleError("round_bandwidth: cannot satisfy the unit cap");
        --units[shed];
        --total;
    }

    // Whole units recovered from the fractional parts go to the largest
    // marginal gain; ties to the lowest device index.
    const int target =
        std::min(sc.sys.n_max,
                 std::max(total, static_cast<int>(std::floor(vec_sum(n_relaxed) + 1e-9))));
    while (total < target) {
        std::size_t grant = 0;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            const double gain = bits_at(k, units[k] + 1) - bits_at(k, units[k]);
            if (gain > best_gain) {
                best_gain = gain;
                grant = k;
            }
        }
        ++units[grant];
        ++total;
    }
    return units;
}

WstResult solve_wst(const Scenario& sc, const SolverConfig& cfg, const StepperKind& kind) {
    sc.validate();
    const std::size_t K = sc.devices.size();
    const auto t_start = Clock::now();

    std::vector<double> p(K, sc.p_max_w / static_cast<double>(K));
    std::vector<double> n(K, static_cast<double>(sc.sys.n_max) / static_cast<double>(K));

    const auto objective = [&] {
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            total += sc.devices[k].weight *
                     total_bits(p[k], n[k], LinkParams::make(sc, static_cast<int>(k)));
        return total;
    };

    WstResult result;
    double prev = objective();
    result.trace.records.push_back({0, prev, 0, 0, ms_since(t_start)});

    for (int t = 1; t <= cfg.max_outer; ++t) {
        const auto t_iter = Clock::now();
        BlockSolveResult ps = solve_power_block(sc, n, p, cfg, kind);
        p = ps.x;
        BlockSolveResult bs = solve_bandwidth_block(sc, p, n, cfg, kind);
        n = bs.x;
        // Keep the iterate strictly positive for the next linearization.
        for (double& v : n) v = std::max(v, 1e-6 * sc.sys.n_max);
        if (const double s = vec_sum(n); s > sc.sys.n_max)
            for (double& v : n) v *= sc.sys.n_max / s;

        const double now = objective();
        if (!std::isfinite(now))
            throw NumericFailure("solve_wst: objective became non-finite", result.trace);
        result.trace.records.push_back({t, now, ps.iterations, bs.iterations, ms_since(t_iter)});
        result.outer_iterations = t;

        if (std::abs(now - prev) <=
            cfg.outer_tol * std::max(std::abs(prev), std::numeric_limits<double>::min()))
            break;
        prev = now;
    }

    const std::vector<int> units = round_bandwidth(n, sc, p);
    std::vector<double> n_int(K);
    for (std::size_t k = 0; k < K; ++k) n_int[k] = static_cast<double>(units[k]);
    p = solve_power_block(sc, n_int, p, cfg, kind).x;

    result.alloc = Allocation{p, n_int};
    result.objective_bits = weighted_sum_throughput(result.alloc, sc);
    return result;
}

}  // namespace secalloc

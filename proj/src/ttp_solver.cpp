#include "secalloc/ttp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "secalloc/errors.hpp"

namespace secalloc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

SolverConfig ttp_default_config() {
    SolverConfig cfg;
    cfg.outer_tol = 1e-4;
    cfg.max_outer = 200;
    cfg.bisect_tol = 1e-8;
    return cfg;
}

double feasible_max_rate(double n_uses, const TtpChannel& ch, Probability eps,
                         Probability delta) {
    if (!(n_uses > 0.0)) throw DomainError("feasible_max_rate: n_uses must be > 0");
    return n_uses * std::log2(ch.h_d / ch.h_e) -
           std::sqrt(n_uses) * penalty_per_sqrt_use(eps, delta);
}

double min_uses_for_demand(const TtpChannel& ch, Probability eps, Probability delta,
                           double demand_bits) {
    if (!(demand_bits >= 0.0)) throw DomainError("min_uses_for_demand: demand must be >= 0");
    const double slope = std::log2(ch.h_d / ch.h_e);
    if (!(slope > 0.0))
        throw InfeasibleError("min_uses_for_demand: device gain does not exceed eavesdropper");
    const double kappa = penalty_per_sqrt_use(eps, delta);
    // a*N - kappa*sqrt(N) = d  ->  sqrt(N) = (kappa + sqrt(kappa^2 + 4ad)) / 2a
    const double root =
        (kappa + std::sqrt(kappa * kappa + 4.0 * slope * demand_bits)) / (2.0 * slope);
    double uses = std::max(root * root, std::numeric_limits<double>::min());
    // Nudge past the exact break-even point so a finite power exists.
    uses *= 1.0 + 1e-9;
    while (!(feasible_max_rate(uses, ch, eps, delta) > demand_bits)) uses *= 1.0 + 1e-9;
    return uses;
}

double min_power_bisect(double n_uses, const TtpChannel& ch, Probability eps, Probability delta,
                        double demand_bits, double tol, int device) {
    if (!(n_uses > 0.0)) throw DomainError("min_power_bisect: n_uses must be > 0");
    if (!(tol > 0.0)) throw DomainError("min_power_bisect: tol must be > 0");
    const double kappa = penalty_per_sqrt_use(eps, delta);
    if (!(demand_bits < feasible_max_rate(n_uses, ch, eps, delta)))
        throw InfeasibleError("min_power_bisect: demand at or above the rate supremum for device " +
                                  std::to_string(device),
                              device);

    if (approx_total_bits(0.0, n_uses, ch, kappa) >= demand_bits) return 0.0;

    double hi = 1.0;
    while (approx_total_bits(hi, n_uses, ch, kappa) < demand_bits) {
        hi *= 2.0;
        if (hi > 1e30)
            throw InfeasibleError(
                "min_power_bisect: demand too close to the rate supremum for device " +
                    std::to_string(device),
                device);
    }
    double lo = hi > 1.0 ? hi / 2.0 : 0.0;
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (approx_total_bits(mid, n_uses, ch, kappa) >= demand_bits)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

TtpResult solve_ttp(const Scenario& sc, const std::vector<double>& demands_bits,
                    const SolverConfig& cfg, const StepperKind& kind) {
    sc.validate();
    const std::size_t K = sc.devices.size();
    if (demands_bits.size() != K)
        throw ValidationError("demands", "length must equal the device count");
    const auto t_start = Clock::now();

    const double budget = sc.sys.n_max * sc.sys.n0_tilde;  // Wc * T channel uses

    std::vector<TtpChannel> ch(K);
    std::vector<double> kappa(K), uses_floor(K);
    for (std::size_t k = 0; k < K; ++k) {
        if (!(demands_bits[k] >= 0.0))
            throw ValidationError("demands[" + std::to_string(k) + "]", "must be >= 0");
        ch[k] = TtpChannel::make(sc, static_cast<int>(k));
        kappa[k] = penalty_per_sqrt_use(sc.devices[k].eps, sc.devices[k].delta);
        uses_floor[k] =
            min_uses_for_demand(ch[k], sc.devices[k].eps, sc.devices[k].delta, demands_bits[k]);
    }
    const double floor_sum = std::accumulate(uses_floor.begin(), uses_floor.end(), 0.0);
    if (floor_sum > budget)
        throw InfeasibleError("solve_ttp: demands need more channel uses than the budget");

    const auto project = [&](const Point& v) {
        // Shift so the lower bounds become the origin, then cap the slack.
        Point shifted(K);
        for (std::size_t k = 0; k < K; ++k) shifted[k] = v[k] - uses_floor[k];
        shifted = project_capped_simplex(shifted, std::max(budget - floor_sum,
                                                           std::numeric_limits<double>::min()));
        for (std::size_t k = 0; k < K; ++k) shifted[k] += uses_floor[k];
        return shifted;
    };

    const auto power_at = [&](std::size_t k, double n_uses) {
        const double clamped = std::max(n_uses, uses_floor[k]);
        return min_power_bisect(clamped, ch[k], sc.devices[k].eps, sc.devices[k].delta,
                                demands_bits[k], cfg.bisect_tol, static_cast<int>(k));
    };
    const auto total_power = [&](const Point& n) {
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) total += power_at(k, n[k]);
        return total;
    };

    // The objective is separable, so a coarse per-device scan lands the
    // start near the per-device minimizers. When those collectively bust
    // the budget, shrink every device's slack above its floor by the same
    // factor; a Euclidean projection here would pin tight devices onto
    // their floors, where the required power blows up.
    Point uses(K);
    double slack_wanted = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double lo = uses_floor[k] * (1.0 + 1e-6);
        const double hi = budget;
        double best_n = lo, best_p = power_at(k, lo);
        const int points = 64;
        for (int i = 1; i < points; ++i) {
            const double n = lo * std::pow(hi / lo, i / static_cast<double>(points - 1));
            const double p = power_at(k, n);
            if (p < best_p) {
                best_p = p;
                best_n = n;
            }
        }
        uses[k] = best_n;
        slack_wanted += best_n - uses_floor[k];
    }
    if (slack_wanted > budget - floor_sum) {
        const double shrink = (budget - floor_sum) / slack_wanted;
        for (std::size_t k = 0; k < K; ++k)
            uses[k] = uses_floor[k] + shrink * (uses[k] - uses_floor[k]);
    }
    uses = project(uses);

    StepConfig scaled = cfg.step;
    scaled.h = cfg.step.h * budget;
    scaled.fd_spacing = cfg.step.fd_spacing * budget;
    scaled.direction = StepDirection::Ascent;  // we ascend the negated power

    const ObjectiveFn objective = [&](const Point& n) { return -total_power(n); };
    // Non-difference kinds still estimate the derivative numerically: the
    // objective is itself a bisection result, so central differences stand
    // in for the analytic gradient.
    const GradientFn central_grad = [&](const Point& n) {
        return fd_gradient(objective, n, scaled, FdScheme::Central);
    };

    TtpResult result;
    double prev = total_power(uses);
    const auto max_slack = [&](const Point& n) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            const double clamped = std::max(n[k], uses_floor[k]);
            const double rate = approx_total_bits(power_at(k, n[k]), clamped, ch[k], kappa[k]);
            worst = std::max(worst, rate - demands_bits[k]);
        }
        return worst;
    };
    result.trace.push_back({0, prev, max_slack(uses), ms_since(t_start)});

    for (int t = 1; t <= cfg.max_outer; ++t) {
        const auto t_iter = Clock::now();
        StepOutcome step =
            backtracked_step(kind, uses, objective, central_grad, scaled, cfg.armijo, project);
        uses = std::move(step.x);

        const double now = total_power(uses);
        if (!std::isfinite(now)) throw SolverError("solve_ttp: total power became non-finite");
        result.trace.push_back({t, now, max_slack(uses), ms_since(t_iter)});

        const bool converged =
            std::abs(now - prev) <=
            cfg.outer_tol * std::max(std::abs(prev), std::numeric_limits<double>::min());
        prev = now;
        if (!step.moved || converged) break;
    }

    // Round to whole bandwidth-unit multiples. Everything rounds up when
    // the cap allows; otherwise up-grants go to the largest power saving
    // and the rest stay floored.
    const double unit = sc.sys.n0_tilde;
    std::vector<int> lb_units(K), down(K), up(K);
    long lb_total = 0;
    for (std::size_t k = 0; k < K; ++k) {
        int u = std::max(1, static_cast<int>(std::ceil(uses_floor[k] / unit - 1e-12)));
        while (!(feasible_max_rate(u * unit, ch[k], sc.devices[k].eps, sc.devices[k].delta) >
                 demands_bits[k]))
            ++u;
        lb_units[k] = u;
        lb_total += u;
        const double m = uses[k] / unit;
        down[k] = std::max(lb_units[k], static_cast<int>(std::floor(m + 1e-9)));
        up[k] = std::max(lb_units[k], static_cast<int>(std::ceil(m - 1e-9)));
    }
    if (lb_total > sc.sys.n_max)
        throw InfeasibleError("solve_ttp: demands infeasible after unit rounding");

    std::vector<int> units = up;
    if (std::accumulate(units.begin(), units.end(), 0) > sc.sys.n_max) {
        units = down;
        int total = std::accumulate(units.begin(), units.end(), 0);
        while (total > sc.sys.n_max) {
            // Shed the unit whose removal costs the least extra power.
            std::size_t shed = K;
            double best_cost = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < K; ++k) {
                if (units[k] <= lb_units[k]) continue;
                const double cost =
                    power_at(k, (units[k] - 1) * unit) - power_at(k, units[k] * unit);
                if (cost < best_cost) {
                    best_cost = cost;
                    shed = k;
                }
            }
            if (shed == K) throw InfeasibleError("solve_ttp: unit cap cannot be met");
            --units[shed];
            --total;
        }
        while (total < sc.sys.n_max) {
            // Spare capacity: grant the unit with the largest power saving.
            std::size_t grant = K;
            double best_saving = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                if (units[k] >= up[k]) continue;
                const double saving =
                    power_at(k, units[k] * unit) - power_at(k, (units[k] + 1) * unit);
                if (saving > best_saving) {
                    best_saving = saving;
                    grant = k;
                }
            }
            if (grant == K) break;
            ++units[grant];
            ++total;
        }
    }

    // Deterministic unit-exchange polish: apply single-unit moves and
    // pairwise swaps while they reduce total power. Memoize the per-unit
    // bisections so the sweeps stay cheap.
    std::vector<std::vector<double>> memo(K);
    const auto unit_power = [&](std::size_t k, int u) {
        if (u < lb_units[k] || u * unit > budget)
            return std::numeric_limits<double>::infinity();
        auto& m = memo[k];
        if (static_cast<int>(m.size()) <= u) m.resize(u + 1, -1.0);
        if (m[u] < 0.0) m[u] = power_at(k, u * unit);
        return m[u];
    };
    int total_units = std::accumulate(units.begin(), units.end(), 0);
    for (int round = 0; round < 1000; ++round) {
        double best_gain = 0.0;
        int give = -1, take = -1;  // give gains a unit, take loses one
        for (std::size_t a = 0; a < K; ++a) {
            const double gain_up = unit_power(a, units[a]) - unit_power(a, units[a] + 1);
            if (total_units < sc.sys.n_max && gain_up > best_gain) {
                best_gain = gain_up;
                give = static_cast<int>(a);
                take = -1;
            }
            for (std::size_t b = 0; b < K; ++b) {
                if (b == a || units[b] <= lb_units[b]) continue;
                const double gain_down = unit_power(b, units[b]) - unit_power(b, units[b] - 1);
                if (gain_down > best_gain) {  // shedding alone can help too
                    best_gain = gain_down;
                    give = -1;
                    take = static_cast<int>(b);
                }
                if (gain_up + gain_down > best_gain) {
                    best_gain = gain_up + gain_down;
                    give = static_cast<int>(a);
                    take = static_cast<int>(b);
                }
            }
        }
        const double scale = 1.0 + std::abs(prev);
        if (best_gain <= 1e-14 * scale) break;
        if (give >= 0) {
            ++units[give];
            ++total_units;
        }
        if (take >= 0) {
            --units[take];
            --total_units;
        }
    }

    result.n_units = units;
    result.n_uses.resize(K);
    result.p_w.resize(K);
    result.total_power_w = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        result.n_uses[k] = units[k] * unit;
        result.p_w[k] = unit_power(k, units[k]);
        result.total_power_w += result.p_w[k];
    }

    // Re-assert the output contract with an independent rate evaluation.
    double check_total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double rate = approx_total_bits(result.p_w[k], result.n_uses[k], ch[k],
                                              sc.devices[k].eps, sc.devices[k].delta);
        if (rate < demands_bits[k] - 1e-6 * std::max(1.0, demands_bits[k]))
            throw SolverError("solve_ttp: rounded allocation violates the demand of device " +
                              std::to_string(k));
        check_total += result.n_uses[k];
    }
    if (check_total > budget * (1.0 + 1e-12))
        throw SolverError("solve_ttp: rounded allocation exceeds the channel-use budget");

    return result;
}

}  // namespace secalloc

#ifndef SECALLOC_TTP_SOLVER_HPP
#define SECALLOC_TTP_SOLVER_HPP

#include <vector>

#include "secalloc/channel.hpp"
#include "secalloc/rate_model.hpp"
#include "secalloc/steppers.hpp"
#include "secalloc/wst_solver.hpp"

// Total-transmit-power minimization under per-device demands. The inner
// problem (minimum power meeting a demand at fixed channel uses) is a 1-D
// bisection because the approximate rate is strictly increasing in power;
// the outer loop runs projected gradient descent over the channel-use
// allocation and rounds it to whole bandwidth-unit multiples at the end.

namespace secalloc {

struct TtpRecord {
    int outer_iter = 0;
    double total_power_w = 0.0;
    double max_slack_bits = 0.0;  // max over devices of rate minus demand
    double elapsed_ms = 0.0;
};

struct TtpResult {
    std::vector<double> p_w;
    std::vector<int> n_units;     // whole bandwidth units per device
    std::vector<double> n_uses;   // n_units * n0_tilde
    double total_power_w = 0.0;
    std::vector<TtpRecord> trace;
};

// Defaults tuned for the power minimizer (tighter outer tolerance, more
// outer iterations than the throughput solver).
SolverConfig ttp_default_config();

// Supremum of the approximate rate over power:
//   N log2(h_d / h_e) - sqrt(N) (Qinv(eps) + Qinv(delta)) / ln2
double feasible_max_rate(double n_uses, const TtpChannel& ch, Probability eps,
                         Probability delta);

// Smallest channel-use count at which `demand_bits` becomes attainable
// (with a tiny margin so the bisection bracket stays finite).
double min_uses_for_demand(const TtpChannel& ch, Probability eps, Probability delta,
                           double demand_bits);

// Smallest power with approx_total_bits >= demand, to relative tolerance
// tol. Bracket grows by doubling from 1 W. Throws InfeasibleError (naming
// `device` when >= 0) if the demand is at or above the rate supremum.
double min_power_bisect(double n_uses, const TtpChannel& ch, Probability eps, Probability delta,
                        double demand_bits, double tol, int device = -1);

// Projected gradient descent on N -> sum_k min_power_bisect(N_k), over
// {N >= N_lb, sum(N) <= Wc*T}, with derivative estimates from the selected
// stepper kind; ends with rounding N up to unit multiples (cap permitting)
// and a final power recomputation.
TtpResult solve_ttp(const Scenario& sc, const std::vector<double>& demands_bits,
                    const SolverConfig& cfg, const StepperKind& kind);

}  // namespace secalloc

#endif

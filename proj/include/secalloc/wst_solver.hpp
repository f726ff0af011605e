#ifndef SECALLOC_WST_SOLVER_HPP
#define SECALLOC_WST_SOLVER_HPP

#include <vector>

#include "secalloc/channel.hpp"
#include "secalloc/errors.hpp"
#include "secalloc/steppers.hpp"

// Weighted-sum-throughput maximization: block coordinate descent that
// alternates a linearized power solve and a linearized bandwidth solve,
// then rounds bandwidth units back to integers.

namespace secalloc {

struct Allocation {
    std::vector<double> p_w;      // per-device transmit power
    std::vector<double> n_units;  // per-device bandwidth units (integral after rounding)
};

struct ArmijoConfig {
    double shrink = 0.5;
    double sufficient_increase = 1e-4;
    int max_backtracks = 40;
};

struct SolverConfig {
    double outer_tol = 1e-3;   // relative objective change that stops the BCD loop
    double inner_tol = 1e-5;   // relative surrogate change that stops a block solve
    double bisect_tol = 1e-8;  // relative power tolerance of the demand bisections
    int max_outer = 100;
    int max_inner = 500;
    // step.h and step.fd_spacing are fractions of the block's budget scale
    // (P_max for the power block, n_max for the bandwidth block).
    StepConfig step{0.1, 1e-6, StepDirection::Ascent};
    ArmijoConfig armijo;
};

struct OuterRecord {
    int outer_iter = 0;
    double objective_bits = 0.0;  // unclamped weighted sum of per-device bits
    int inner_power_iters = 0;
    int inner_bw_iters = 0;
    double elapsed_ms = 0.0;
};

struct ConvergenceTrace {
    std::vector<OuterRecord> records;
};

// Thrown when an iterate produces a non-finite objective; carries the
// partial trace for diagnosis.
class NumericFailure : public SolverError {
public:
    NumericFailure(const std::string& what, ConvergenceTrace trace)
        : SolverError(what), trace_(std::move(trace)) {}
    const ConvergenceTrace& trace() const noexcept { return trace_; }

private:
    ConvergenceTrace trace_;
};

struct BlockSolveResult {
    std::vector<double> x;
    int iterations = 0;
    // Frozen-linearization surrogate value at the incoming point and after
    // the accepted step, one pair per inner iteration. The backtracking
    // rule guarantees after >= before.
    std::vector<double> surrogate_before;
    std::vector<double> surrogate_after;
};

struct WstResult {
    Allocation alloc;          // n_units holds whole numbers after rounding
    ConvergenceTrace trace;    // pre-rounding objective per outer iteration
    double objective_bits = 0.0;  // reported throughput of the final allocation
    int outer_iterations = 0;
};

struct StepOutcome {
    std::vector<double> x;
    bool moved = false;
};

// One projected step of `kind` with backtracking on the maximized
// objective: the candidate must improve it by at least
// sufficient_increase times the first-order prediction along the realized
// displacement, else h shrinks and the step retries. Returns the incoming
// point with moved == false when backtracking exhausts. For
// finite-difference kinds the gradient oracle is built internally from
// the objective; other kinds use `analytic_grad`.
StepOutcome backtracked_step(const StepperKind& kind, const std::vector<double>& y,
                             const ObjectiveFn& objective, const GradientFn& analytic_grad,
                             const StepConfig& cfg, const ArmijoConfig& armijo,
                             const ProjectionFn& project);

// Euclidean projection onto {v : v >= 0, sum(v) <= cap}. Idempotent.
std::vector<double> project_capped_simplex(const std::vector<double>& x, double cap);

// sum_k weight_k * max(0, total_bits(p_k, n_k)). Devices with zero power
// or zero bandwidth contribute nothing.
double weighted_sum_throughput(const Allocation& alloc, const Scenario& sc);

// One linearize-then-ascend block solve at fixed bandwidth. Each inner
// iteration freezes the penalty slope at the incoming point and takes a
// single projected, backtracked step of the concave surrogate.
BlockSolveResult solve_power_block(const Scenario& sc, const std::vector<double>& n_fixed,
                                   const std::vector<double>& p0, const SolverConfig& cfg,
                                   const StepperKind& kind);

// Same structure at fixed power; output is the relaxed (real-valued)
// bandwidth allocation capped at n_max.
BlockSolveResult solve_bandwidth_block(const Scenario& sc, const std::vector<double>& p_fixed,
                                       const std::vector<double>& n0, const SolverConfig& cfg,
                                       const StepperKind& kind);

// Floor to whole units (at least one each), then grant the whole units
// recovered from the fractional parts one at a time to the device with the
// largest marginal weighted-bit gain; ties go to the lowest index.
std::vector<int> round_bandwidth(const std::vector<double>& n_relaxed, const Scenario& sc,
                                 const std::vector<double>& p_w);

// Full BCD loop: uniform start, alternate block solves until the relative
// objective change drops below outer_tol, then round bandwidth and re-solve
// power at the fixed integer allocation.
WstResult solve_wst(const Scenario& sc, const SolverConfig& cfg, const StepperKind& kind);

}  // namespace secalloc

#endif

#ifndef SECALLOC_HARNESS_HPP
#define SECALLOC_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "secalloc/channel.hpp"
#include "secalloc/steppers.hpp"
#include "secalloc/wst_solver.hpp"

// Experiment driver: spec files in, CSV out. Runs the throughput and
// power solvers over parameter grids with reproducible seeds.

namespace secalloc {

enum class ExperimentKind {
    Convergence,     // objective trace per outer iteration at fixed K
    WstVsPower,      // throughput as the power budget grows
    WstVsDevices,    // throughput as K grows (coherence bandwidth scales with K)
    TtpVsDemand,     // total power as the per-device demand grows
    TtpVsBandwidth,  // total power as the coherence bandwidth grows
    TtpVsDevices     // total power as K grows at fixed bandwidth
};

ExperimentKind parse_experiment(const std::string& name);
std::string experiment_name(ExperimentKind kind);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Convergence;
    std::vector<double> sweep;            // strictly increasing, non-empty
    std::vector<std::string> steppers;    // stepper names, plus optionally "reference"
    std::vector<std::uint64_t> seeds;     // at least one
    GenSpec base;                         // scenario generation parameters
    SolverConfig solver;                  // shared overrides; TTP runs tighten them
    double wc_per_device_hz = 0.0;        // WstVsDevices growth rule; 0 -> base wc / base k

    void validate() const;
};

struct ResultRow {
    std::string experiment;
    std::string stepper;
    long long seed = 0;
    double swept_value = 0.0;
    double metric = 0.0;      // bits for WST experiments, watts for TTP
    int iterations = 0;
    double elapsed_ms = 0.0;
    bool failed = false;      // solver error; metric emitted as nan, iterations -1
};

// Spec file I/O (JSON). load_spec fills defaults for everything the file
// leaves out and throws ValidationError with the offending field path.
ExperimentSpec load_spec(const std::string& path);
ExperimentSpec spec_from_json_text(const std::string& text);
std::string spec_to_json_text(const ExperimentSpec& spec);
void save_spec(const ExperimentSpec& spec, const std::string& path);

// Materialized scenario I/O, so experiments replay without the generator.
std::string scenario_to_json_text(const Scenario& sc);
Scenario scenario_from_json_text(const std::string& text);
void save_scenario(const Scenario& sc, const std::string& path);

// A file holding either {"scenario": ...} (loaded as-is, seed ignored) or
// generation parameters (fed to gen_scenario with `seed`).
Scenario load_or_generate_scenario(const std::string& path, std::uint64_t seed);

// One row per (stepper, seed, swept value), in that nesting order, followed
// by "<stepper>_agg" rows holding the per-value mean over seeds (seed -1).
// The convergence experiment additionally emits one "convergence_trace"
// row per outer iteration. Solver failures become flagged rows; they do
// not abort the sweep. Cells run on a small worker pool (override the
// size with the SECALLOC_WORKERS environment variable); output order does
// not depend on scheduling.
std::vector<ResultRow> run_sweep(const ExperimentSpec& spec);

// Header plus one line per row, full-precision scientific notation,
// columns: experiment,stepper,seed,swept_value,metric,iterations,elapsed_ms.
// Wall-clock times vary run to run, so elapsed_ms is written as 0 unless
// include_timing is set; leaving it off keeps re-runs byte-identical.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path,
              bool include_timing = false);
void emit_csv(const std::vector<ResultRow>& rows, std::ostream& out,
              bool include_timing = false);

// The analytic-gradient baseline the experiment tables label "reference":
// the Euler kind run to a much tighter inner tolerance.
SolverConfig reference_config(const SolverConfig& base);

}  // namespace secalloc

#endif

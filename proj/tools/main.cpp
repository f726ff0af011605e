// secalloc CLI: scenario generation, single solves with trace output, and
// experiment sweeps. See README.md for spec-file schemas.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "secalloc/errors.hpp"
#include "secalloc/harness.hpp"
#include "secalloc/ttp_solver.hpp"
#include "secalloc/wst_solver.hpp"

namespace {

using namespace secalloc;

std::string fmt_full(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

StepperKind kind_for(const std::string& label) {
    return label == "reference" ? StepperKind{StepperKind::Family::Euler, FdScheme::Central}
                                : StepperKind::parse(label);
}

SolverConfig config_for(const std::string& label, const SolverConfig& base) {
    return label == "reference" ? reference_config(base) : base;
}

void write_wst_trace(const ConvergenceTrace& trace, const std::string& path, bool timing) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("", "cannot write trace file '" + path + "'");
    out << "outer_iter,objective_bits,inner_power_iters,inner_bw_iters,elapsed_ms\n";
    for (const OuterRecord& r : trace.records)
        out << r.outer_iter << ',' << fmt_full(r.objective_bits) << ',' << r.inner_power_iters
            << ',' << r.inner_bw_iters << ',' << fmt_full(timing ? r.elapsed_ms : 0.0) << '\n';
}

void write_ttp_trace(const std::vector<TtpRecord>& trace, const std::string& path, bool timing) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("", "cannot write trace file '" + path + "'");
    out << "outer_iter,total_power_watts,max_constraint_slack_bits,elapsed_ms\n";
    for (const TtpRecord& r : trace)
        out << r.outer_iter << ',' << fmt_full(r.total_power_w) << ','
            << fmt_full(r.max_slack_bits) << ',' << fmt_full(timing ? r.elapsed_ms : 0.0) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secure short-packet resource allocation solver"};
    app.require_subcommand(1);

    std::string spec_path, out_path, stepper = "euler";
    std::uint64_t seed = 1;
    bool timing = false;

    auto* gen = app.add_subcommand("gen-scenario", "Generate and save a scenario");
    gen->add_option("--spec", spec_path, "generation spec (JSON)")->required();
    gen->add_option("--seed", seed, "RNG seed");
    gen->add_option("--out", out_path, "output scenario file")->required();

    auto* wst = app.add_subcommand("wst", "Maximize weighted sum throughput");
    wst->add_option("--spec", spec_path, "scenario or generation spec (JSON)")->required();
    wst->add_option("--seed", seed, "RNG seed (generation specs only)");
    wst->add_option("--stepper", stepper, "euler|heun|ralston|fd-(forward|backward|central)|reference");
    wst->add_option("--out", out_path, "convergence trace CSV");
    wst->add_flag("--timing", timing, "emit measured wall-clock times (breaks reproducibility)");

    auto* ttp = app.add_subcommand("ttp", "Minimize total transmit power");
    ttp->add_option("--spec", spec_path, "scenario or generation spec (JSON)")->required();
    ttp->add_option("--seed", seed, "RNG seed (generation specs only)");
    ttp->add_option("--stepper", stepper, "stepper kind or reference");
    ttp->add_option("--out", out_path, "trace CSV");
    ttp->add_flag("--timing", timing, "emit measured wall-clock times (breaks reproducibility)");

    auto* sweep = app.add_subcommand("sweep", "Run an experiment sweep");
    sweep->add_option("--spec", spec_path, "experiment spec (JSON)")->required();
    sweep->add_option("--out", out_path, "results CSV")->required();
    sweep->add_flag("--timing", timing, "emit measured wall-clock times (breaks reproducibility)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            std::ifstream in(spec_path);
            if (!in) throw ValidationError("", "cannot open spec file '" + spec_path + "'");
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            // Accept a full experiment spec or a bare system/devices file.
            Scenario sc = [&] {
                try {
                    return gen_scenario(spec_from_json_text(text).base, seed);
                } catch (const ValidationError&) {
                    return load_or_generate_scenario(spec_path, seed);
                }
            }();
            save_scenario(sc, out_path);
            std::cout << "wrote " << out_path << " (K=" << sc.device_count() << ")\n";
            return 0;
        }

        if (wst->parsed()) {
            const Scenario sc = load_or_generate_scenario(spec_path, seed);
            const WstResult res = solve_wst(sc, config_for(stepper, SolverConfig{}),
                                            kind_for(stepper));
            std::cout << "objective_bits=" << fmt_full(res.objective_bits)
                      << " outer_iterations=" << res.outer_iterations << '\n';
            for (std::size_t k = 0; k < res.alloc.p_w.size(); ++k)
                std::cout << "device " << k << ": p_w=" << fmt_full(res.alloc.p_w[k])
                          << " n_units=" << static_cast<long long>(res.alloc.n_units[k]) << '\n';
            if (!out_path.empty()) write_wst_trace(res.trace, out_path, timing);
            return 0;
        }

        if (ttp->parsed()) {
            const Scenario sc = load_or_generate_scenario(spec_path, seed);
            std::vector<double> demands(sc.devices.size());
            for (std::size_t k = 0; k < demands.size(); ++k)
                demands[k] = sc.devices[k].d_min_bits;
            const TtpResult res = solve_ttp(sc, demands, config_for(stepper, ttp_default_config()),
                                            kind_for(stepper));
            std::cout << "total_power_w=" << fmt_full(res.total_power_w)
                      << " outer_iterations=" << res.trace.size() - 1 << '\n';
            for (std::size_t k = 0; k < res.p_w.size(); ++k)
                std::cout << "device " << k << ": p_w=" << fmt_full(res.p_w[k])
                          << " n_units=" << res.n_units[k] << '\n';
            if (!out_path.empty()) write_ttp_trace(res.trace, out_path, timing);
            return 0;
        }

        if (sweep->parsed()) {
            const ExperimentSpec spec = load_spec(spec_path);
            const std::vector<ResultRow> rows = run_sweep(spec);
            emit_csv(rows, out_path, timing);
            std::cout << "wrote " << rows.size() << " rows to " << out_path << '\n';
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

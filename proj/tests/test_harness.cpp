#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "secalloc/errors.hpp"
#include "secalloc/harness.hpp"

using namespace secalloc;

namespace {

bool same_spec(const ExperimentSpec& a, const ExperimentSpec& b) {
    return spec_to_json_text(a) == spec_to_json_text(b);
}

std::string csv_text(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    emit_csv(rows, out);
    return out.str();
}

}  // namespace

TEST_CASE("defaults fill in the standard parameterization") {
    const ExperimentSpec spec = spec_from_json_text("{}");
    CHECK(spec.base.b0_hz == 1000.0);
    CHECK(spec.base.t_s == 0.01);
    CHECK(spec.base.wc_hz == 0.5e6);
    CHECK(spec.base.eps == 1e-9);
    CHECK(spec.base.delta == 1e-2);
    CHECK(spec.base.noise_psd_dbm_hz == -173.0);
    CHECK(spec.kind == ExperimentKind::Convergence);
    CHECK(spec.sweep == std::vector<double>{0.0});
    CHECK(spec.seeds.size() == 3);
}

TEST_CASE("validation failures name the field") {
    try {
        spec_from_json_text(R"({"system": {"p_max_w": -2.0}})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("p_max_w") != std::string::npos);
    }
    CHECK_THROWS_AS(spec_from_json_text(R"({"sweep": {"values": [2.0, 1.0]},
                                            "experiment": "wst_vs_power"})"),
                    ValidationError);
    CHECK_THROWS_AS(spec_from_json_text(R"({"steppers": ["rk9"]})"), ValidationError);
    CHECK_THROWS_AS(spec_from_json_text("not json"), ValidationError);
}

TEST_CASE("spec round trip") {
    const std::string text = R"({
        "experiment": "ttp_vs_demand",
        "sweep": {"values": [50.0, 100.0, 150.0]},
        "steppers": ["heun", "reference"],
        "seeds": [5, 6],
        "system": {"wc_hz": 2.0e5, "p_max_w": 2.5},
        "devices": {"k": 3, "eps": 1.0e-7},
        "solver": {"max_outer": 64}
    })";
    const ExperimentSpec spec = spec_from_json_text(text);
    CHECK(spec.base.k == 3);
    CHECK(spec.base.eps == 1e-7);
    CHECK(spec.solver.max_outer == 64);
    CHECK(spec.solver.outer_tol == 1e-4);  // power-minimizer default kicks in

    const ExperimentSpec back = spec_from_json_text(spec_to_json_text(spec));
    CHECK(same_spec(spec, back));
}

TEST_CASE("scenario round trip") {
    GenSpec gen;
    gen.k = 3;
    const Scenario sc = gen_scenario(gen, 11);
    const Scenario back = scenario_from_json_text(scenario_to_json_text(sc));
    CHECK(back.device_count() == 3);
    CHECK(back.g_e == sc.g_e);
    CHECK(back.p_max_w == sc.p_max_w);
    CHECK(back.sys.n_max == sc.sys.n_max);
    for (int k = 0; k < 3; ++k) {
        CHECK(back.devices[k].g_d == sc.devices[k].g_d);
        CHECK(back.devices[k].eps.value() == sc.devices[k].eps.value());
    }
}

TEST_CASE("sweep cardinality and determinism") {
    const ExperimentSpec spec = spec_from_json_text(R"({
        "experiment": "wst_vs_power",
        "sweep": {"values": [0.4, 0.8, 1.2, 1.6, 2.0]},
        "steppers": ["euler", "heun"],
        "seeds": [1, 2, 3],
        "devices": {"k": 2},
        "solver": {"max_outer": 12}
    })");
    const std::vector<ResultRow> rows = run_sweep(spec);

    int main_rows = 0, agg_rows = 0;
    for (const ResultRow& r : rows) {
        if (r.stepper.find("_agg") != std::string::npos)
            ++agg_rows;
        else
            ++main_rows;
        CHECK(!r.failed);
        CHECK(std::isfinite(r.metric));
    }
    CHECK(main_rows == 30);  // 5 values x 2 steppers x 3 seeds
    CHECK(agg_rows == 10);   // 5 values x 2 steppers

    // throughput grows with the budget, per stepper and seed
    for (const char* stepper : {"euler", "heun"}) {
        for (long long seed = 1; seed <= 3; ++seed) {
            double prev = -1.0;
            for (const ResultRow& r : rows) {
                if (r.stepper != stepper || r.seed != seed) continue;
                CHECK(r.metric >= prev * (1.0 - 0.005));
                prev = r.metric;
            }
        }
    }

    const std::vector<ResultRow> again = run_sweep(spec);
    CHECK(csv_text(rows) == csv_text(again));
}

TEST_CASE("convergence experiments attach trace rows") {
    const ExperimentSpec spec = spec_from_json_text(R"({
        "experiment": "convergence",
        "steppers": ["heun"],
        "seeds": [4],
        "devices": {"k": 2}
    })");
    const std::vector<ResultRow> rows = run_sweep(spec);

    int trace_rows = 0;
    for (const ResultRow& r : rows)
        if (r.experiment == "convergence_trace") ++trace_rows;
    CHECK(trace_rows >= 2);

    // trace objective is non-decreasing
    double prev = -1e300;
    for (const ResultRow& r : rows) {
        if (r.experiment != "convergence_trace") continue;
        CHECK(r.metric >= prev - 1e-9 * std::abs(prev));
        prev = r.metric;
    }
}

TEST_CASE("solver failures become flagged rows") {
    const ExperimentSpec spec = spec_from_json_text(R"({
        "experiment": "ttp_vs_demand",
        "sweep": {"values": [1.0e9]},
        "steppers": ["euler"],
        "seeds": [1],
        "devices": {"k": 1}
    })");
    const std::vector<ResultRow> rows = run_sweep(spec);
    REQUIRE(rows.size() == 2);  // one cell, one aggregate
    CHECK(rows[0].failed);
    CHECK(rows[1].failed);

    const std::string text = csv_text(rows);
    CHECK(text.find("nan") != std::string::npos);
    CHECK(text.find(",-1,") != std::string::npos);
}

TEST_CASE("csv shape") {
    CHECK(csv_text({}) ==
          "experiment,stepper,seed,swept_value,metric,iterations,elapsed_ms\n");

    std::vector<ResultRow> rows(30);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].experiment = "wst_vs_power";
        rows[i].stepper = "euler";
        rows[i].seed = static_cast<long long>(i);
        rows[i].swept_value = 0.5 * i;
        rows[i].metric = 1234.5 + i;
        rows[i].iterations = static_cast<int>(i);
        rows[i].elapsed_ms = 9.75;  // suppressed unless timing is requested
    }
    const std::string text = csv_text(rows);
    CHECK(std::count(text.begin(), text.end(), '\n') == 31);
    CHECK(csv_text(rows) == text);
    CHECK(text.find("9.75") == std::string::npos);

    std::ostringstream timed;
    emit_csv(rows, timed, true);
    CHECK(timed.str().find("9.75") != std::string::npos);
}

// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// anything fails. Tolerances are fixed here, not tuned at runtime.

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "search_oracles.hpp"
#include "secalloc/harness.hpp"
#include "secalloc/rate_model.hpp"
#include "secalloc/ttp_solver.hpp"
#include "secalloc/wst_solver.hpp"

using namespace secalloc;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!ok) ++failures;
}

// --- straight-line transcriptions of the closed forms ------------------

double v_line(double s) { return 1.0 - std::pow(1.0 + s, -2.0); }

double chi_line(double p, double gd, double ge, double ld, double le) {
    const auto term = [&](double g, double l) {
        return std::pow(1.0 + p * g, -3.0) * g * l / std::sqrt(v_line(p * g));
    };
    return term(gd, ld) + term(ge, le);
}

double xi_line(double n, double gd, double ge, double ld, double le) {
    const auto z = [&](double g) { return n - n * n * n / ((n + g) * (n + g)); };
    const auto term = [&](double g, double l) {
        return l * (3.0 * g * g * n + g * g * g) /
               (2.0 * std::sqrt(z(g)) * (n + g) * (n + g) * (n + g));
    };
    return term(gd, ld) + term(ge, le);
}

struct SamplePoint {
    double p, n;
    int dev;
};

std::vector<SamplePoint> sample_points(const Scenario& sc, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> up(1e-4, sc.p_max_w / sc.device_count());
    std::uniform_real_distribution<double> un(2.0, sc.sys.n_max / sc.device_count());
    std::vector<SamplePoint> pts;
    pts.reserve(count);
    for (int i = 0; i < count; ++i) pts.push_back({up(rng), un(rng), i % sc.device_count()});
    return pts;
}

void criterion_1() {
    const Scenario sc = gen_scenario(GenSpec{.k = 4}, 1);
    double worst = 0.0;
    std::string where = "all clear";

    const auto track = [&](double err, const char* what) {
        if (err > worst) {
            worst = err;
            where = what;
        }
    };

    for (const SamplePoint& pt : sample_points(sc, 100, 77)) {
        const auto& dev = sc.devices[pt.dev];
        const double qe = oracle::qinv_bisect(dev.eps.value());
        const double qd = oracle::qinv_bisect(dev.delta.value());
        const double ln2 = 0.6931471805599453;
        const double n_uses = pt.n * sc.sys.n0_tilde;

        // transferable bits
        const double tb = total_bits(pt.p, pt.n, LinkParams::make(sc, pt.dev));
        const double tb_line = oracle::total_bits_line(pt.p, pt.n, dev.g_d, sc.g_e,
                                                       sc.sys.n0_tilde, dev.eps.value(),
                                                       dev.delta.value());
        track(oracle::rel_err(tb, tb_line), "total bits");

        // power-block split and its penalty slope
        const double gd_bar = dev.g_d / pt.n, ge_bar = sc.g_e / pt.n;
        const double ld = qe * std::sqrt(n_uses) / ln2, le = qd * std::sqrt(n_uses) / ln2;
        const PowerSection ps = PowerSection::make(sc, pt.dev, pt.n);
        const RateParts pparts = power_parts(pt.p, ps);
        const double f_line =
            n_uses * (std::log2(1.0 + pt.p * gd_bar) - std::log2(1.0 + pt.p * ge_bar));
        const double y_line = std::sqrt(v_line(pt.p * gd_bar)) * ld +
                              std::sqrt(v_line(pt.p * ge_bar)) * le;
        track(oracle::rel_err(pparts.capacity, f_line), "power capacity section");
        track(oracle::rel_err(pparts.penalty, y_line), "power penalty section");
        track(oracle::rel_err(power_penalty_deriv(pt.p, ps),
                              chi_line(pt.p, gd_bar, ge_bar, ld, le)),
              "power penalty slope");

        // bandwidth-block split and its penalty slope
        const double gd_hat = pt.p * dev.g_d, ge_hat = pt.p * sc.g_e;
        const double n0 = sc.sys.n0_tilde;
        const double ld_bar = std::sqrt(n0) * qe / ln2, le_bar = std::sqrt(n0) * qd / ln2;
        const BandwidthSection bs = BandwidthSection::make(sc, pt.dev, pt.p);
        const RateParts bparts = bandwidth_parts(pt.n, bs);
        const double cap_line = n0 * pt.n * (std::log2(1.0 + gd_hat / pt.n) -
                                             std::log2(1.0 + ge_hat / pt.n));
        const auto z_line = [&](double g) {
            return pt.n - pt.n * pt.n * pt.n / ((pt.n + g) * (pt.n + g));
        };
        const double pen_line =
            std::sqrt(z_line(gd_hat)) * ld_bar + std::sqrt(z_line(ge_hat)) * le_bar;
        track(oracle::rel_err(bparts.capacity, cap_line), "bandwidth capacity section");
        track(oracle::rel_err(bparts.penalty, pen_line), "bandwidth penalty section");
        track(oracle::rel_err(bandwidth_penalty_deriv(pt.n, bs),
                              xi_line(pt.n, gd_hat, ge_hat, ld_bar, le_bar)),
              "bandwidth penalty slope");

        // approximate rate
        const TtpChannel ch = TtpChannel::make(sc, pt.dev);
        const double ar = approx_total_bits(pt.p, n_uses, ch, dev.eps, dev.delta);
        const double ar_line = oracle::approx_bits_line(pt.p, n_uses, ch.h_d, ch.h_e,
                                                        dev.eps.value(), dev.delta.value());
        track(oracle::rel_err(ar, ar_line), "approximate rate");
    }

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "math core vs straight-line oracles, worst rel err %.2e (%s), bound 1e-9",
                  worst, where.c_str());
    report(1, worst <= 1e-9, buf);
}

void criterion_2() {
    const Scenario sc = gen_scenario(GenSpec{.k = 4}, 2);
    double worst_first = 0.0, worst_second = 0.0;
    bool concave = true;

    // Difference quotients need moderate SNR to be resolvable in doubles
    // (at saturated dispersion the penalty slope is ~1e-12 of the penalty
    // itself); criterion 1 already pins the closed forms in every regime,
    // so the samples here fix the SNR per point and derive p and n from it.
    std::mt19937_64 rng(78);
    std::uniform_real_distribution<double> u_gamma(std::log(0.1), std::log(100.0));
    std::uniform_real_distribution<double> u_n(2.0, sc.sys.n_max / sc.device_count());
    for (int i = 0; i < 100; ++i) {
        const int dev = i % sc.device_count();
        const double g_d = sc.devices[dev].g_d;
        const double n_for_power = u_n(rng);
        const double p = std::exp(u_gamma(rng)) * n_for_power / g_d;
        const double p_for_bw = u_n(rng) / g_d;  // scaled gain ~ bandwidth scale
        const double n = (p_for_bw * g_d) / std::exp(u_gamma(rng));

        const PowerSection ps = PowerSection::make(sc, dev, n_for_power);
        const BandwidthSection bs = BandwidthSection::make(sc, dev, p_for_bw);

        const auto y_of = [&](double q) { return power_parts(q, ps).penalty; };
        const auto f_of = [&](double q) { return power_parts(q, ps).capacity; };
        const auto yy_of = [&](double m) { return bandwidth_parts(m, bs).penalty; };
        const auto ff_of = [&](double m) { return bandwidth_parts(m, bs).capacity; };

        worst_first = std::max(worst_first,
                               oracle::rel_err(power_penalty_deriv(p, ps),
                                               oracle::central_diff(y_of, p, 1e-6 * p)));
        worst_first = std::max(worst_first,
                               oracle::rel_err(bandwidth_penalty_deriv(n, bs),
                                               oracle::central_diff(yy_of, n, 1e-6 * n)));

        const RateCurvature pc = power_second_derivs(p, ps);
        const RateCurvature bc = bandwidth_second_derivs(n, bs);
        const double hp = 3e-3 * p;
        const double hn = 3e-3 * n;
        worst_second = std::max(worst_second,
                                oracle::rel_err(pc.capacity, oracle::second_diff4(f_of, p, hp)));
        worst_second = std::max(worst_second,
                                oracle::rel_err(pc.penalty, oracle::second_diff4(y_of, p, hp)));
        worst_second = std::max(worst_second,
                                oracle::rel_err(bc.capacity, oracle::second_diff4(ff_of, n, hn)));
        worst_second = std::max(worst_second,
                                oracle::rel_err(bc.penalty, oracle::second_diff4(yy_of, n, hn)));
        concave = concave && pc.capacity < 0.0 && pc.penalty < 0.0 && bc.capacity < 0.0 &&
                  bc.penalty < 0.0;
    }

    // Sign checks hold everywhere, including the saturated corners.
    for (const SamplePoint& pt : sample_points(sc, 100, 79)) {
        const RateCurvature pc =
            power_second_derivs(pt.p, PowerSection::make(sc, pt.dev, pt.n));
        const RateCurvature bc =
            bandwidth_second_derivs(pt.n, BandwidthSection::make(sc, pt.dev, pt.p));
        concave = concave && pc.capacity < 0.0 && pc.penalty < 0.0 && bc.capacity < 0.0 &&
                  bc.penalty < 0.0;
    }

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "derivatives vs differences: first %.2e (bound 1e-6), second %.2e (bound "
                  "1e-4), concavity %s",
                  worst_first, worst_second, concave ? "holds" : "VIOLATED");
    report(2, worst_first <= 1e-6 && worst_second <= 1e-4 && concave, buf);
}

void criterion_3() {
    const char* labels[] = {"euler", "heun", "ralston", "fd-central", "reference"};
    bool ok = true;
    int worst_iters = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Scenario sc = gen_scenario(GenSpec{.k = 6}, seed);
        for (const char* label : labels) {
            const bool ref = std::string(label) == "reference";
            const StepperKind kind = ref ? StepperKind::parse("euler") : StepperKind::parse(label);
            const SolverConfig cfg = ref ? reference_config(SolverConfig{}) : SolverConfig{};
            const WstResult res = solve_wst(sc, cfg, kind);
            worst_iters = std::max(worst_iters, res.outer_iterations);
            if (res.outer_iterations > 30) ok = false;
            double prev = -1e300;
            for (const OuterRecord& r : res.trace.records) {
                if (r.objective_bits < prev - 1e-9 * std::abs(prev)) ok = false;
                prev = r.objective_bits;
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "K=6 BCD: all kinds + reference converged (max %d outer iters, bound 30) "
                  "with monotone traces over 5 seeds",
                  worst_iters);
    report(3, ok, buf);
}

bool monotone_series(const std::vector<ResultRow>& rows, const std::string& stepper,
                     long long seed, bool increasing) {
    double prev = increasing ? -1e300 : 1e300;
    for (const ResultRow& r : rows) {
        if (r.stepper != stepper || r.seed != seed) continue;
        if (r.failed) return false;
        if (increasing) {
            if (r.metric < prev * (1.0 - 0.005)) return false;
        } else {
            if (r.metric > prev * (1.0 + 0.005)) return false;
        }
        prev = r.metric;
    }
    return true;
}

void criterion_4() {
    struct Shape {
        const char* text;
        bool increasing;
    };
    // TTP sweeps use seeds whose secrecy margins keep every grid point
    // feasible; infeasible cells would show up as flagged rows and fail
    // the series check.
    const std::vector<std::pair<std::string, Shape>> sweeps = {
        {R"({"experiment": "wst_vs_power",
             "sweep": {"values": [0.5, 1.0, 2.0, 4.0]},
             "devices": {"k": 6}, "seeds": [1, 2, 3]})",
         {"WST vs power budget", true}},
        {R"({"experiment": "wst_vs_devices",
             "sweep": {"values": [2, 4, 6, 8]}, "seeds": [1, 2, 3]})",
         {"WST vs device count", true}},
        {R"({"experiment": "ttp_vs_demand",
             "sweep": {"values": [80, 130, 180, 230]},
             "devices": {"k": 2}, "seeds": [1, 7, 8]})",
         {"TTP vs demand", true}},
        {R"({"experiment": "ttp_vs_bandwidth",
             "sweep": {"values": [2.0e5, 3.0e5, 4.0e5, 5.0e5]},
             "devices": {"k": 3, "d_min_bits": 120.0}, "seeds": [2, 7, 8]})",
         {"TTP vs coherence bandwidth", false}},
        {R"({"experiment": "ttp_vs_devices",
             "sweep": {"values": [1, 2, 3, 4]},
             "devices": {"d_min_bits": 150.0}, "seeds": [1, 7, 8]})",
         {"TTP vs device count", true}},
    };

    bool all_ok = true;
    for (const auto& [base_text, shape] : sweeps) {
        std::string text = base_text;
        text.insert(text.rfind('}'), R"(, "steppers": ["heun", "fd-central"])");
        const ExperimentSpec spec = spec_from_json_text(text);
        const std::vector<ResultRow> rows = run_sweep(spec);
        bool ok = true;
        for (const std::string stepper : {"heun", "fd-central"})
            for (const std::uint64_t seed : spec.seeds)
                ok = ok && monotone_series(rows, stepper, static_cast<long long>(seed),
                                           shape.increasing);
        if (!ok) all_ok = false;
        std::printf("         %s: %s\n", shape.text, ok ? "monotone" : "NOT monotone");
    }
    report(4, all_ok,
           "figure-shape sweeps monotone per (stepper, seed), 0.5% slack, 3 seeds each");
}

void criterion_5() {
    bool wst_ok = true;
    double worst_ratio = 1.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Scenario sc = gen_scenario(GenSpec{.k = 2}, seed);
        const WstResult res = solve_wst(sc, SolverConfig{}, StepperKind::parse("heun"));
        const double best = oracle::exhaustive_wst_best(sc, 200);
        worst_ratio = std::min(worst_ratio, res.objective_bits / best);
        if (res.objective_bits < 0.98 * best) wst_ok = false;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "K=2 WST vs exhaustive grid: worst ratio %.4f (bound 0.98) on 10 seeds",
                  worst_ratio);
    report(5, wst_ok, buf);

    bool ttp_ok = true;
    double worst_excess = 0.0;
    int used = 0;
    GenSpec small;
    small.k = 2;
    small.wc_hz = 2e4;  // 20 bandwidth units
    const double demand = 25.0;
    for (std::uint64_t seed = 1; used < 10 && seed <= 60; ++seed) {
        const Scenario sc = gen_scenario(small, seed);
        // integer feasibility screen: whole-unit floors must fit the cap
        int unit_floor_sum = 0;
        bool feasible = true;
        try {
            for (int k = 0; k < 2; ++k) {
                const double uses = min_uses_for_demand(TtpChannel::make(sc, k),
                                                        sc.devices[k].eps, sc.devices[k].delta,
                                                        demand);
                unit_floor_sum += static_cast<int>(std::ceil(uses / sc.sys.n0_tilde));
            }
        } catch (const InfeasibleError&) {
            feasible = false;
        }
        if (!feasible || unit_floor_sum > sc.sys.n_max - 1) continue;
        ++used;
        const TtpResult res =
            solve_ttp(sc, {demand, demand}, ttp_default_config(), StepperKind::parse("heun"));
        const double best = oracle::exhaustive_ttp_best(sc, {demand, demand});
        worst_excess = std::max(worst_excess, res.total_power_w / best - 1.0);
        if (res.total_power_w > best * 1.02) ttp_ok = false;
    }
    std::snprintf(buf, sizeof buf,
                  "K=2 TTP vs exhaustive splits: worst excess %.3f%% (bound 2%%) on %d seeds",
                  worst_excess * 100.0, used);
    report(5, ttp_ok && used == 10, buf);
}

void criterion_6() {
    const double err2 = oracle::rel_err(qfunc_inv(Probability(1e-2)), oracle::qinv_bisect(1e-2));
    const double err9 = oracle::rel_err(qfunc_inv(Probability(1e-9)), oracle::qinv_bisect(1e-9));

    double worst_rt = 0.0;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(std::log(1e-12), std::log(0.5));
    for (int i = 0; i < 5000; ++i) {
        const double p = std::exp(u(rng));
        for (const double probe : {p, 1.0 - p}) {
            const double back = qfunc(qfunc_inv(Probability(probe))).value();
            worst_rt = std::max(worst_rt, std::abs(back - probe) / probe);
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "inverse tail: err(1e-2)=%.1e, err(1e-9)=%.1e (bound 1e-4); round trip "
                  "%.1e (bound 1e-10)",
                  err2, err9, worst_rt);
    report(6, err2 <= 1e-4 && err9 <= 1e-4 && worst_rt <= 1e-10, buf);
}

void criterion_7() {
    const ExperimentSpec spec = spec_from_json_text(R"({
        "experiment": "wst_vs_power",
        "sweep": {"values": [0.5, 1.0]},
        "steppers": ["ralston"],
        "seeds": [1, 2],
        "devices": {"k": 2}
    })");
    std::ostringstream a, b;
    emit_csv(run_sweep(spec), a);
    emit_csv(run_sweep(spec), b);
    const bool ok = a.str() == b.str() && !a.str().empty();
    report(7, ok, "identical spec twice yields byte-identical CSV");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    std::printf("[NOTE] criterion 8: absolute figure values are not reproduced by design; "
                "comparisons run on this artifact's seeded scenarios instead\n");
    if (failures > 0) {
        std::printf("%d criterion check(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}

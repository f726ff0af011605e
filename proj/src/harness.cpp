#include "secalloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "secalloc/errors.hpp"
#include "secalloc/ttp_solver.hpp"

namespace secalloc {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// --- JSON helpers -----------------------------------------------------

const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path, "expected a number");
    return j.get<double>();
}

void read_number(const json& section, const char* sec_name, const char* key, double& out) {
    if (const json* v = find(section, key)) out = get_number(*v, std::string(sec_name) + "." + key);
}

void read_int(const json& section, const char* sec_name, const char* key, int& out) {
    if (const json* v = find(section, key)) {
        const std::string path = std::string(sec_name) + "." + key;
        if (!v->is_number_integer()) throw ValidationError(path, "expected an integer");
        out = v->get<int>();
    }
}

std::vector<double> get_number_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw ValidationError(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(get_number(v, path));
    return out;
}

// --- spec sections ----------------------------------------------------

GenSpec gen_spec_from_json(const json& root) {
    GenSpec g;
    if (const json* sys = find(root, "system")) {
        if (!sys->is_object()) throw ValidationError("system", "expected an object");
        read_number(*sys, "system", "b0_hz", g.b0_hz);
        read_number(*sys, "system", "t_s", g.t_s);
        read_number(*sys, "system", "wc_hz", g.wc_hz);
        read_number(*sys, "system", "noise_psd_dbm_hz", g.noise_psd_dbm_hz);
        read_number(*sys, "system", "p_max_w", g.p_max_w);
    }
    if (const json* dev = find(root, "devices")) {
        if (!dev->is_object()) throw ValidationError("devices", "expected an object");
        read_int(*dev, "devices", "k", g.k);
        read_number(*dev, "devices", "distance_m", g.distance_m);
        read_number(*dev, "devices", "eve_distance_m", g.eve_distance_m);
        read_number(*dev, "devices", "eps", g.eps);
        read_number(*dev, "devices", "delta", g.delta);
        if (const json* v = find(*dev, "distances_m"))
            g.distances_m = get_number_list(*v, "devices.distances_m");
        if (const json* v = find(*dev, "weights"))
            g.weights = get_number_list(*v, "devices.weights");
        if (const json* v = find(*dev, "d_min_bits")) {
            if (v->is_array())
                g.d_min_bits = get_number_list(*v, "devices.d_min_bits");
            else
                g.d_min_default_bits = get_number(*v, "devices.d_min_bits");
        }
    }
    return g;
}

json gen_spec_to_json(const GenSpec& g) {
    json sys{{"b0_hz", g.b0_hz},
             {"t_s", g.t_s},
             {"wc_hz", g.wc_hz},
             {"noise_psd_dbm_hz", g.noise_psd_dbm_hz},
             {"p_max_w", g.p_max_w}};
    json dev{{"k", g.k},
             {"distance_m", g.distance_m},
             {"eve_distance_m", g.eve_distance_m},
             {"eps", g.eps},
             {"delta", g.delta}};
    if (!g.distances_m.empty()) dev["distances_m"] = g.distances_m;
    if (!g.weights.empty()) dev["weights"] = g.weights;
    if (!g.d_min_bits.empty())
        dev["d_min_bits"] = g.d_min_bits;
    else
        dev["d_min_bits"] = g.d_min_default_bits;
    return json{{"system", std::move(sys)}, {"devices", std::move(dev)}};
}

void solver_from_json(const json& root, SolverConfig& cfg) {
    const json* s = find(root, "solver");
    if (!s) return;
    if (!s->is_object()) throw ValidationError("solver", "expected an object");
    read_number(*s, "solver", "outer_tol", cfg.outer_tol);
    read_number(*s, "solver", "inner_tol", cfg.inner_tol);
    read_number(*s, "solver", "bisect_tol", cfg.bisect_tol);
    read_int(*s, "solver", "max_outer", cfg.max_outer);
    read_int(*s, "solver", "max_inner", cfg.max_inner);
    read_number(*s, "solver", "step_h", cfg.step.h);
    read_number(*s, "solver", "fd_spacing", cfg.step.fd_spacing);
    read_number(*s, "solver", "armijo_shrink", cfg.armijo.shrink);
    read_number(*s, "solver", "armijo_sufficient_increase", cfg.armijo.sufficient_increase);
    read_int(*s, "solver", "armijo_max_backtracks", cfg.armijo.max_backtracks);
}

json solver_to_json(const SolverConfig& cfg) {
    return json{{"outer_tol", cfg.outer_tol},
                {"inner_tol", cfg.inner_tol},
                {"bisect_tol", cfg.bisect_tol},
                {"max_outer", cfg.max_outer},
                {"max_inner", cfg.max_inner},
                {"step_h", cfg.step.h},
                {"fd_spacing", cfg.step.fd_spacing},
                {"armijo_shrink", cfg.armijo.shrink},
                {"armijo_sufficient_increase", cfg.armijo.sufficient_increase},
                {"armijo_max_backtracks", cfg.armijo.max_backtracks}};
}

bool is_ttp_kind(ExperimentKind kind) {
    return kind == ExperimentKind::TtpVsDemand || kind == ExperimentKind::TtpVsBandwidth ||
           kind == ExperimentKind::TtpVsDevices;
}

std::string fmt_full(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

}  // namespace

ExperimentKind parse_experiment(const std::string& name) {
    if (name == "convergence") return ExperimentKind::Convergence;
    if (name == "wst_vs_power") return ExperimentKind::WstVsPower;
    if (name == "wst_vs_devices") return ExperimentKind::WstVsDevices;
    if (name == "ttp_vs_demand") return ExperimentKind::TtpVsDemand;
    if (name == "ttp_vs_bandwidth") return ExperimentKind::TtpVsBandwidth;
    if (name == "ttp_vs_devices") return ExperimentKind::TtpVsDevices;
    throw ValidationError("experiment", "unknown kind '" + name + "'");
}

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Convergence: return "convergence";
        case ExperimentKind::WstVsPower: return "wst_vs_power";
        case ExperimentKind::WstVsDevices: return "wst_vs_devices";
        case ExperimentKind::TtpVsDemand: return "ttp_vs_demand";
        case ExperimentKind::TtpVsBandwidth: return "ttp_vs_bandwidth";
        case ExperimentKind::TtpVsDevices: return "ttp_vs_devices";
    }
    return "unknown";
}

void ExperimentSpec::validate() const {
    if (sweep.empty()) throw ValidationError("sweep.values", "must not be empty");
    for (std::size_t i = 1; i < sweep.size(); ++i)
        if (!(sweep[i] > sweep[i - 1]))
            throw ValidationError("sweep.values", "must be strictly increasing");
    if (seeds.empty()) throw ValidationError("seeds", "need at least one seed");
    if (steppers.empty()) throw ValidationError("steppers", "need at least one stepper");
    for (const auto& s : steppers)
        if (s != "reference") StepperKind::parse(s);  // throws on unknown names
    base.validate();
    if (kind == ExperimentKind::WstVsDevices || kind == ExperimentKind::TtpVsDevices) {
        for (double v : sweep)
            if (!(v >= 1.0) || v != std::floor(v))
                throw ValidationError("sweep.values", "device counts must be whole and >= 1");
    }
    if (kind == ExperimentKind::TtpVsBandwidth) {
        for (double v : sweep)
            if (!(v > 0.0)) throw ValidationError("sweep.values", "bandwidths must be > 0");
    }
    if (kind == ExperimentKind::WstVsPower) {
        for (double v : sweep)
            if (!(v > 0.0)) throw ValidationError("sweep.values", "power budgets must be > 0");
    }
}

ExperimentSpec spec_from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("", std::string("spec is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ValidationError("", "spec root must be an object");

    ExperimentSpec spec;
    if (const json* v = find(root, "experiment")) {
        if (!v->is_string()) throw ValidationError("experiment", "expected a string");
        spec.kind = parse_experiment(v->get<std::string>());
    }
    // The two solvers ship different defaults; pick by experiment kind
    // before applying user overrides.
    spec.solver = is_ttp_kind(spec.kind) ? ttp_default_config() : SolverConfig{};

    if (const json* sweep = find(root, "sweep")) {
        if (!sweep->is_object()) throw ValidationError("sweep", "expected an object");
        if (const json* v = find(*sweep, "values"))
            spec.sweep = get_number_list(*v, "sweep.values");
        if (const json* v = find(*sweep, "wc_per_device_hz"))
            spec.wc_per_device_hz = get_number(*v, "sweep.wc_per_device_hz");
    }
    if (spec.sweep.empty() && spec.kind == ExperimentKind::Convergence) spec.sweep = {0.0};

    if (const json* v = find(root, "steppers")) {
        if (!v->is_array()) throw ValidationError("steppers", "expected an array of names");
        for (const auto& s : *v) {
            if (!s.is_string()) throw ValidationError("steppers", "expected an array of names");
            spec.steppers.push_back(s.get<std::string>());
        }
    } else {
        spec.steppers = {"euler", "heun", "ralston", "fd-central", "reference"};
    }

    if (const json* v = find(root, "seeds")) {
        if (!v->is_array()) throw ValidationError("seeds", "expected an array of integers");
        for (const auto& s : *v) {
            if (!s.is_number_integer()) throw ValidationError("seeds", "expected integers");
            spec.seeds.push_back(s.get<std::uint64_t>());
        }
    } else {
        spec.seeds = {1, 2, 3};
    }

    spec.base = gen_spec_from_json(root);
    solver_from_json(root, spec.solver);
    if (spec.wc_per_device_hz == 0.0)
        spec.wc_per_device_hz = spec.base.wc_hz / static_cast<double>(spec.base.k);

    spec.validate();
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("", "cannot open spec file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return spec_from_json_text(buf.str());
}

std::string spec_to_json_text(const ExperimentSpec& spec) {
    json root = gen_spec_to_json(spec.base);
    root["experiment"] = experiment_name(spec.kind);
    root["sweep"] = json{{"values", spec.sweep}, {"wc_per_device_hz", spec.wc_per_device_hz}};
    root["steppers"] = spec.steppers;
    root["seeds"] = spec.seeds;
    root["solver"] = solver_to_json(spec.solver);
    return root.dump(2) + "\n";
}

void save_spec(const ExperimentSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("", "cannot write spec file '" + path + "'");
    out << spec_to_json_text(spec);
}

std::string scenario_to_json_text(const Scenario& sc) {
    json devices = json::array();
    for (const auto& d : sc.devices)
        devices.push_back(json{{"g_d", d.g_d},
                               {"weight", d.weight},
                               {"eps", d.eps.value()},
                               {"delta", d.delta.value()},
                               {"d_min_bits", d.d_min_bits}});
    json root{{"scenario",
               json{{"system", json{{"b0_hz", sc.sys.b0_hz},
                                    {"t_s", sc.sys.t_s},
                                    {"wc_hz", sc.sys.wc_hz}}},
                    {"g_e", sc.g_e},
                    {"p_max_w", sc.p_max_w},
                    {"devices", std::move(devices)}}}};
    return root.dump(2) + "\n";
}

Scenario scenario_from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("", std::string("scenario is not valid JSON: ") + e.what());
    }
    const json* sc_json = find(root, "scenario");
    if (!sc_json || !sc_json->is_object())
        throw ValidationError("scenario", "missing scenario object");

    const json* sys = find(*sc_json, "system");
    if (!sys || !sys->is_object()) throw ValidationError("scenario.system", "missing");
    double b0 = 0, t = 0, wc = 0;
    read_number(*sys, "scenario.system", "b0_hz", b0);
    read_number(*sys, "scenario.system", "t_s", t);
    read_number(*sys, "scenario.system", "wc_hz", wc);

    Scenario sc;
    sc.sys = SystemParams::make(b0, t, wc);
    if (const json* v = find(*sc_json, "g_e")) sc.g_e = get_number(*v, "scenario.g_e");
    if (const json* v = find(*sc_json, "p_max_w")) sc.p_max_w = get_number(*v, "scenario.p_max_w");

    const json* devices = find(*sc_json, "devices");
    if (!devices || !devices->is_array())
        throw ValidationError("scenario.devices", "expected an array");
    for (std::size_t k = 0; k < devices->size(); ++k) {
        const json& d = (*devices)[k];
        const std::string path = "scenario.devices[" + std::to_string(k) + "]";
        if (!d.is_object()) throw ValidationError(path, "expected an object");
        double g_d = 0, weight = 1, eps = 0, delta = 0, d_min = 0;
        read_number(d, path.c_str(), "g_d", g_d);
        read_number(d, path.c_str(), "weight", weight);
        read_number(d, path.c_str(), "eps", eps);
        read_number(d, path.c_str(), "delta", delta);
        read_number(d, path.c_str(), "d_min_bits", d_min);
        sc.devices.push_back(DeviceChannel{g_d, weight, Probability(eps), Probability(delta), d_min});
    }
    sc.validate();
    return sc;
}

void save_scenario(const Scenario& sc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("", "cannot write scenario file '" + path + "'");
    out << scenario_to_json_text(sc);
}

Scenario load_or_generate_scenario(const std::string& path, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw ValidationError("", "cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("", std::string("file is not valid JSON: ") + e.what());
    }
    if (root.is_object() && find(root, "scenario")) return scenario_from_json_text(text);
    GenSpec g = gen_spec_from_json(root);
    return gen_scenario(g, seed);
}

SolverConfig reference_config(const SolverConfig& base) {
    SolverConfig cfg = base;
    cfg.inner_tol = 1e-8;
    cfg.outer_tol = std::min(base.outer_tol, 1e-6);
    return cfg;
}

namespace {

struct CellOutput {
    ResultRow main;
    std::vector<ResultRow> aux;
};

struct Cell {
    std::string label;
    std::uint64_t seed;
    double value;
};

CellOutput run_cell(const ExperimentSpec& spec, const Cell& cell) {
    const bool reference = cell.label == "reference";
    const StepperKind kind =
        reference ? StepperKind{StepperKind::Family::Euler, FdScheme::Central}
                  : StepperKind::parse(cell.label);
    const SolverConfig cfg = reference ? reference_config(spec.solver) : spec.solver;

    CellOutput out;
    out.main.experiment = experiment_name(spec.kind);
    out.main.stepper = cell.label;
    out.main.seed = static_cast<long long>(cell.seed);
    out.main.swept_value = cell.value;

    const auto t0 = Clock::now();
    try {
        switch (spec.kind) {
            case ExperimentKind::Convergence:
            case ExperimentKind::WstVsPower:
            case ExperimentKind::WstVsDevices: {
                GenSpec g = spec.base;
                if (spec.kind == ExperimentKind::WstVsPower) {
                    g.p_max_w = cell.value;
                } else if (spec.kind == ExperimentKind::WstVsDevices) {
                    g.k = static_cast<int>(cell.value);
                    const double units =
                        std::max(1.0, std::round(spec.wc_per_device_hz * cell.value / g.b0_hz));
                    g.wc_hz = units * g.b0_hz;
                    if (!g.d_min_bits.empty()) g.d_min_bits.clear();
                    if (!g.weights.empty()) g.weights.clear();
                    if (!g.distances_m.empty()) g.distances_m.clear();
                }
                const Scenario sc = gen_scenario(g, cell.seed);
                const WstResult res = solve_wst(sc, cfg, kind);
                out.main.metric = res.objective_bits;
                out.main.iterations = res.outer_iterations;
                if (spec.kind == ExperimentKind::Convergence) {
                    for (const OuterRecord& r : res.trace.records)
                        out.aux.push_back(ResultRow{"convergence_trace", cell.label,
                                                    static_cast<long long>(cell.seed),
                                                    static_cast<double>(r.outer_iter),
                                                    r.objective_bits, r.outer_iter,
                                                    r.elapsed_ms, false});
                }
                break;
            }
            case ExperimentKind::TtpVsDemand:
            case ExperimentKind::TtpVsBandwidth:
            case ExperimentKind::TtpVsDevices: {
                GenSpec g = spec.base;
                if (spec.kind == ExperimentKind::TtpVsBandwidth) {
                    const double units = std::max(1.0, std::round(cell.value / g.b0_hz));
                    g.wc_hz = units * g.b0_hz;
                } else if (spec.kind == ExperimentKind::TtpVsDevices) {
                    g.k = static_cast<int>(cell.value);
                    if (!g.d_min_bits.empty()) g.d_min_bits.clear();
                    if (!g.weights.empty()) g.weights.clear();
                    if (!g.distances_m.empty()) g.distances_m.clear();
                }
                const Scenario sc = gen_scenario(g, cell.seed);
                std::vector<double> demands(sc.devices.size());
                for (std::size_t k = 0; k < demands.size(); ++k)
                    demands[k] = spec.kind == ExperimentKind::TtpVsDemand
                                     ? cell.value
                                     : sc.devices[k].d_min_bits;
                const TtpResult res = solve_ttp(sc, demands, cfg, kind);
                out.main.metric = res.total_power_w;
                out.main.iterations = static_cast<int>(res.trace.size()) - 1;
                break;
            }
        }
    } catch (const std::exception&) {
        out.main.failed = true;
        out.main.metric = std::numeric_limits<double>::quiet_NaN();
        out.main.iterations = -1;
    }
    out.main.elapsed_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    return out;
}

}  // namespace

std::vector<ResultRow> run_sweep(const ExperimentSpec& spec) {
    spec.validate();

    std::vector<Cell> cells;
    for (const auto& label : spec.steppers)
        for (std::uint64_t seed : spec.seeds)
            for (double value : spec.sweep) cells.push_back({label, seed, value});

    std::size_t workers = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("SECALLOC_WORKERS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed >= 1) workers = static_cast<std::size_t>(parsed);
    }
    workers = std::max<std::size_t>(1, std::min(workers, cells.size()));

    std::vector<CellOutput> outputs(cells.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            outputs[i] = run_cell(spec, cells[i]);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<ResultRow> rows;
    for (const CellOutput& out : outputs) {
        rows.push_back(out.main);
        rows.insert(rows.end(), out.aux.begin(), out.aux.end());
    }

    // Companion mean-over-seeds rows per (stepper, swept value).
    for (const auto& label : spec.steppers) {
        for (double value : spec.sweep) {
            double metric_sum = 0.0, iter_sum = 0.0, ms_sum = 0.0;
            int count = 0;
            for (const CellOutput& out : outputs) {
                const ResultRow& r = out.main;
                if (r.failed || r.stepper != label || r.swept_value != value) continue;
                metric_sum += r.metric;
                iter_sum += r.iterations;
                ms_sum += r.elapsed_ms;
                ++count;
            }
            ResultRow agg;
            agg.experiment = experiment_name(spec.kind);
            agg.stepper = label + "_agg";
            agg.seed = -1;
            agg.swept_value = value;
            if (count > 0) {
                agg.metric = metric_sum / count;
                agg.iterations = static_cast<int>(std::llround(iter_sum / count));
                agg.elapsed_ms = ms_sum / count;
            } else {
                agg.failed = true;
                agg.metric = std::numeric_limits<double>::quiet_NaN();
                agg.iterations = -1;
            }
            rows.push_back(std::move(agg));
        }
    }
    return rows;
}

void emit_csv(const std::vector<ResultRow>& rows, std::ostream& out, bool include_timing) {
    out << "experiment,stepper,seed,swept_value,metric,iterations,elapsed_ms\n";
    for (const ResultRow& r : rows) {
        const double metric = r.failed ? std::numeric_limits<double>::quiet_NaN() : r.metric;
        const int iterations = r.failed ? -1 : r.iterations;
        out << r.experiment << ',' << r.stepper << ',' << r.seed << ','
            << fmt_full(r.swept_value) << ',' << fmt_full(metric) << ',' << iterations << ','
            << fmt_full(include_timing ? r.elapsed_ms : 0.0) << '\n';
    }
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path, bool include_timing) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("", "cannot write CSV file '" + path + "'");
    emit_csv(rows, out, include_timing);
    if (!out) throw ValidationError("", "I/O error writing CSV file '" + path + "'");
}

}  // namespace secalloc

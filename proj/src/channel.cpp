#include "secalloc/channel.hpp"

#include <cmath>
#include <string>

#include "secalloc/errors.hpp"

namespace secalloc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::int64_t stream_id)
    : state_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream_id)))) {}

double RandomStream::next_uniform() {
    state_ = splitmix64(state_);
    // 53 mantissa bits; in (0,1) after the half-ulp shift.
    return (static_cast<double>(state_ >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::next_exponential() { return -std::log1p(-next_uniform()); }

SystemParams SystemParams::make(double b0_hz, double t_s, double wc_hz) {
    if (!(b0_hz > 0.0)) throw ValidationError("system.b0_hz", "must be > 0");
    if (!(t_s > 0.0)) throw ValidationError("system.t_s", "must be > 0");
    if (!(wc_hz > 0.0)) throw ValidationError("system.wc_hz", "must be > 0");
    const double units = wc_hz / b0_hz;
    const int n_max = static_cast<int>(std::llround(units));
    if (n_max < 1 || std::abs(n_max * b0_hz - wc_hz) > 1e-9 * wc_hz)
        throw ValidationError("system.wc_hz", "must be a whole positive multiple of b0_hz");
    SystemParams sp;
    sp.b0_hz = b0_hz;
    sp.t_s = t_s;
    sp.wc_hz = n_max * b0_hz;  // normalized so n_max * b0 == wc exactly
    sp.n_max = n_max;
    sp.n0_tilde = b0_hz * t_s;
    return sp;
}

void Scenario::validate() const {
    if (devices.empty()) throw ValidationError("devices", "need at least one device");
    if (!(p_max_w > 0.0)) throw ValidationError("p_max_w", "must be > 0");
    if (!(g_e > 0.0)) throw ValidationError("g_e", "must be > 0");
    for (std::size_t k = 0; k < devices.size(); ++k) {
        const auto& d = devices[k];
        const std::string where = "devices[" + std::to_string(k) + "]";
        if (!(d.g_d > 0.0)) throw ValidationError(where + ".g_d", "must be > 0");
        if (!(d.g_d > g_e))
            throw ValidationError(where + ".g_d", "must exceed the eavesdropper gain");
        if (!(d.weight > 0.0)) throw ValidationError(where + ".weight", "must be > 0");
        if (!(d.d_min_bits >= 0.0)) throw ValidationError(where + ".d_min_bits", "must be >= 0");
    }
}

double path_loss_db(double distance_m) {
    if (!(distance_m > 0.0)) throw DomainError("path_loss_db: distance must be > 0");
    return 35.3 + 37.6 * std::log10(distance_m);
}

double channel_gain(double h_sq, double noise_psd_w_hz, double b0_hz) {
    if (!(h_sq > 0.0) || !(noise_psd_w_hz > 0.0) || !(b0_hz > 0.0))
        throw DomainError("channel_gain: all inputs must be > 0");
    return h_sq / (noise_psd_w_hz * b0_hz);
}

double snr(double p_w, double gain, double n_units) {
    if (!(p_w >= 0.0)) throw DomainError("snr: power must be >= 0");
    if (!(gain > 0.0)) throw DomainError("snr: gain must be > 0");
    if (!(n_units > 0.0)) throw DomainError("snr: bandwidth units must be > 0");
    return p_w * gain / n_units;
}

void GenSpec::validate() const {
    if (k < 1) throw ValidationError("generate.k", "must be >= 1");
    if (!(p_max_w > 0.0)) throw ValidationError("generate.p_max_w", "must be > 0");
    if (!(distance_m > 0.0)) throw ValidationError("generate.distance_m", "must be > 0");
    if (!(eve_distance_m > 0.0)) throw ValidationError("generate.eve_distance_m", "must be > 0");
    if (!distances_m.empty() && static_cast<int>(distances_m.size()) != k)
        throw ValidationError("generate.distances_m", "length must equal k");
    for (double d : distances_m)
        if (!(d > 0.0)) throw ValidationError("generate.distances_m", "entries must be > 0");
    if (!weights.empty() && static_cast<int>(weights.size()) != k)
        throw ValidationError("generate.weights", "length must equal k");
    if (!d_min_bits.empty() && static_cast<int>(d_min_bits.size()) != k)
        throw ValidationError("generate.d_min_bits", "length must equal k");
    if (!(d_min_default_bits >= 0.0))
        throw ValidationError("generate.d_min_bits", "must be >= 0");
    Probability check_eps(eps);      // throws outside (0,1)
    Probability check_delta(delta);
    (void)check_eps;
    (void)check_delta;
}

Scenario gen_scenario(const GenSpec& spec, std::uint64_t seed) {
    spec.validate();

    Scenario sc;
    sc.sys = SystemParams::make(spec.b0_hz, spec.t_s, spec.wc_hz);
    sc.p_max_w = spec.p_max_w;

    const double noise_w_hz = dbm_to_watt(spec.noise_psd_dbm_hz);

    RandomStream eve_stream(seed, -1);
    const double eve_atten = std::pow(10.0, -path_loss_db(spec.eve_distance_m) / 10.0);
    sc.g_e = channel_gain(eve_atten * eve_stream.next_exponential(), noise_w_hz, spec.b0_hz);

    sc.devices.reserve(spec.k);
    for (int k = 0; k < spec.k; ++k) {
        const double dist = spec.distances_m.empty() ? spec.distance_m : spec.distances_m[k];
        const double atten = std::pow(10.0, -path_loss_db(dist) / 10.0);
        RandomStream stream(seed, k);

        double g_d = 0.0;
        bool accepted = false;
        for (int attempt = 0; attempt < 10000; ++attempt) {
            g_d = channel_gain(atten * stream.next_exponential(), noise_w_hz, spec.b0_hz);
            if (g_d > sc.g_e) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw GenerationError("gen_scenario: device " + std::to_string(k) +
                                  " could not beat the eavesdropper gain in 10000 draws");

        DeviceChannel dev{g_d,
                          spec.weights.empty() ? 1.0 : spec.weights[k],
                          Probability(spec.eps),
                          Probability(spec.delta),
                          spec.d_min_bits.empty() ? spec.d_min_default_bits : spec.d_min_bits[k]};
        sc.devices.push_back(dev);
    }

    sc.validate();
    return sc;
}

}  // namespace secalloc

#ifndef SECALLOC_CHANNEL_HPP
#define SECALLOC_CHANNEL_HPP

#include <cstdint>
#include <vector>

#include "secalloc/numerics.hpp"

// Downlink scenario: per-device channel gains, the eavesdropper gain and
// the global radio parameters.

namespace secalloc {

// Global radio constants. Invariants enforced at construction:
// n_max * b0 == wc exactly (wc is normalized onto the unit grid) and
// n0_tilde = b0 * t > 0.
struct SystemParams {
    double b0_hz = 0.0;      // bandwidth unit
    double t_s = 0.0;        // transmission time
    double wc_hz = 0.0;      // coherence bandwidth
    int n_max = 0;           // wc / b0, whole bandwidth units
    double n0_tilde = 0.0;   // channel uses per bandwidth unit, b0 * t

    static SystemParams make(double b0_hz, double t_s, double wc_hz);
};

struct DeviceChannel {
    double g_d = 0.0;        // per-watt gain |h|^2 / (noise_psd * b0)
    double weight = 1.0;     // throughput weight, > 0
    Probability eps;         // decoding error probability
    Probability delta;       // information leakage
    double d_min_bits = 0.0; // minimum demand, used by the power minimizer
};

struct Scenario {
    SystemParams sys;
    std::vector<DeviceChannel> devices;
    double g_e = 0.0;        // eavesdropper per-watt gain
    double p_max_w = 0.0;    // total power budget

    int device_count() const noexcept { return static_cast<int>(devices.size()); }

    // Throws ValidationError if any invariant fails (K >= 1, p_max > 0,
    // g_d > g_e for every device).
    void validate() const;
};

// 35.3 + 37.6 log10(l), l in meters > 0.
double path_loss_db(double distance_m);

// h_sq / (noise_psd * b0); all inputs > 0.
double channel_gain(double h_sq, double noise_psd_w_hz, double b0_hz);

// p * g / n; p >= 0, g > 0, n > 0.
double snr(double p_w, double gain, double n_units);

// Inputs for gen_scenario. Defaults follow the standard parameterization:
// 1 kHz units, 10 ms slots, 0.5 MHz coherence bandwidth, -173 dBm/Hz noise,
// eps = 1e-9, delta = 1e-2, devices and eavesdropper at 200 m.
struct GenSpec {
    int k = 6;
    double b0_hz = 1e3;
    double t_s = 10e-3;
    double wc_hz = 0.5e6;
    double noise_psd_dbm_hz = -173.0;
    std::vector<double> distances_m = {};   // per device; empty -> all at distance_m
    double distance_m = 200.0;
    double eve_distance_m = 200.0;
    double p_max_w = 1.0;
    std::vector<double> weights = {};       // empty -> all 1
    std::vector<double> d_min_bits = {};    // empty -> all d_min_default_bits
    double d_min_default_bits = 200.0;
    double eps = 1e-9;
    double delta = 1e-2;

    void validate() const;
};

// Deterministic scenario generation.
//
// Stream split: draw i of stream s is splitmix64 applied to
// mix(seed, s) + i, where devices use s = k (their index) and the
// eavesdropper s = -1. Adding a device never disturbs existing streams,
// so scenarios nest across K for a fixed seed.
//
// Small-scale fading is unit-mean exponential power on top of the linear
// path-loss attenuation. The eavesdropper is drawn once; each device's
// fading is resampled from its own stream until g_d > g_e (error after
// 10,000 attempts).
Scenario gen_scenario(const GenSpec& spec, std::uint64_t seed);

// Counter-based uniform stream used by gen_scenario; exposed so tests can
// check the fading statistics directly.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::int64_t stream_id);
    double next_uniform();      // in (0,1)
    double next_exponential();  // unit mean

private:
    std::uint64_t state_;
};

}  // namespace secalloc

#endif

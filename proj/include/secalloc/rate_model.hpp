#ifndef SECALLOC_RATE_MODEL_HPP
#define SECALLOC_RATE_MODEL_HPP

#include "secalloc/channel.hpp"
#include "secalloc/numerics.hpp"

// Finite-blocklength secrecy rate mathematics. The transferable-bit count
// for a device with n bandwidth units and power p is
//
//   R = N*C - sqrt(N*V_d) * Qinv(eps) / ln2 - sqrt(N*V_e) * Qinv(delta) / ln2
//
// with N = n * b0 * t channel uses, C the secrecy capacity and V the
// channel dispersion. Both block solvers rewrite R as the difference of
// two concave sections (capacity minus dispersion penalty); the penalty
// derivatives below are the linearization coefficients frozen by the
// solvers each inner iteration.

namespace secalloc {

// capacity - penalty == total bits at the same point.
struct RateParts {
    double capacity = 0.0;
    double penalty = 0.0;
    double bits() const noexcept { return capacity - penalty; }
};

struct RateCurvature {
    double capacity = 0.0;  // second derivative of the capacity section
    double penalty = 0.0;   // second derivative of the penalty section
};

// Per-device constants needed by total_bits.
struct LinkParams {
    double g_d = 0.0;
    double g_e = 0.0;
    double n0_tilde = 0.0;   // channel uses per bandwidth unit
    double qinv_eps = 0.0;
    double qinv_delta = 0.0;

    static LinkParams make(const Scenario& sc, int device);
};

// Fixed-bandwidth (power block) section context. gain_* are the per-unit
// gains g/n, coef_* = Qinv * sqrt(N) / ln2.
struct PowerSection {
    double gain_d = 0.0;
    double gain_e = 0.0;
    double n_uses = 0.0;
    double coef_d = 0.0;
    double coef_e = 0.0;
    double p_floor = 0.0;   // derivative evaluations clamp p below this

    static PowerSection make(const Scenario& sc, int device, double n_units);
};

// Fixed-power (bandwidth block) section context. gain_* are the scaled
// gains p*g, coef_* = sqrt(n0) * Qinv / ln2.
struct BandwidthSection {
    double gain_d = 0.0;
    double gain_e = 0.0;
    double n0 = 0.0;
    double coef_d = 0.0;
    double coef_e = 0.0;
    double n_floor = 0.0;

    static BandwidthSection make(const Scenario& sc, int device, double p_w);
};

// Channel-use-normalized gains h = g * n0 used by the power minimizer
// under the unit-dispersion approximation.
struct TtpChannel {
    double h_d = 0.0;
    double h_e = 0.0;

    static TtpChannel make(const Scenario& sc, int device);
};

// Channel dispersion V(gamma) = 1 - (1 + gamma)^-2, gamma >= 0.
double dispersion(double gamma);

// log2(1 + gamma_d) - log2(1 + gamma_e), bits per channel use.
double secrecy_capacity(double gamma_d, double gamma_e);

// Transferable bits for power p over n bandwidth units. May be negative;
// callers clamp only when reporting throughput.
double total_bits(double p_w, double n_units, const LinkParams& lp);

// Power-block decomposition and its derivatives (all clamp p to p_floor).
RateParts power_parts(double p_w, const PowerSection& cs);
double power_penalty_deriv(double p_w, const PowerSection& cs);   // > 0
double power_capacity_deriv(double p_w, const PowerSection& cs);
RateCurvature power_second_derivs(double p_w, const PowerSection& cs);

// z(n) = n - n^3/(n + ghat)^2, the channel-use-scaled dispersion;
// identical to n * dispersion(ghat / n).
double scaled_dispersion(double n_units, double ghat);

// Bandwidth-block decomposition and its derivatives (clamp n to n_floor).
RateParts bandwidth_parts(double n_units, const BandwidthSection& cs);
double bandwidth_penalty_deriv(double n_units, const BandwidthSection& cs);
double bandwidth_capacity_deriv(double n_units, const BandwidthSection& cs);
RateCurvature bandwidth_second_derivs(double n_units, const BandwidthSection& cs);

// Approximate rate under V ~= 1, used by the power minimizer:
//   N * [log2(1 + p h_d / N) - log2(1 + p h_e / N)] - sqrt(N) * kappa
// where kappa = (Qinv(eps) + Qinv(delta)) / ln2. Strictly increasing in p
// when h_d > h_e.
double approx_total_bits(double p_w, double n_uses, const TtpChannel& ch, double kappa);
double approx_total_bits(double p_w, double n_uses, const TtpChannel& ch, Probability eps,
                         Probability delta);

// kappa helper shared by the power minimizer and its tests.
double penalty_per_sqrt_use(Probability eps, Probability delta);

}  // namespace secalloc

#endif

#include "secalloc/rate_model.hpp"

#include <cmath>
#include <numbers>

#include "secalloc/errors.hpp"

namespace secalloc {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// sqrt(V(s)) for s = p * gain, written as s(s+2)/(1+s)^2 to stay accurate
// for small s.
double sqrt_dispersion(double s) { return std::sqrt(s * (s + 2.0)) / (1.0 + s); }

double clamp_floor(double x, double floor) { return x < floor ? floor : x; }

}  // namespace

LinkParams LinkParams::make(const Scenario& sc, int device) {
    const DeviceChannel& d = sc.devices.at(device);
    return {d.g_d, sc.g_e, sc.sys.n0_tilde, qfunc_inv(d.eps), qfunc_inv(d.delta)};
}

PowerSection PowerSection::make(const Scenario& sc, int device, double n_units) {
    if (!(n_units > 0.0)) throw DomainError("PowerSection: n_units must be > 0");
    const DeviceChannel& d = sc.devices.at(device);
    const double n_uses = n_units * sc.sys.n0_tilde;
    const double root_n = std::sqrt(n_uses);
    return {d.g_d / n_units,
            sc.g_e / n_units,
            n_uses,
            qfunc_inv(d.eps) * root_n / kLn2,
            qfunc_inv(d.delta) * root_n / kLn2,
            1e-9 * sc.p_max_w};
}

BandwidthSection BandwidthSection::make(const Scenario& sc, int device, double p_w) {
    if (!(p_w >= 0.0)) throw DomainError("BandwidthSection: power must be >= 0");
    const DeviceChannel& d = sc.devices.at(device);
    const double root_n0 = std::sqrt(sc.sys.n0_tilde);
    return {p_w * d.g_d,
            p_w * sc.g_e,
            sc.sys.n0_tilde,
            root_n0 * qfunc_inv(d.eps) / kLn2,
            root_n0 * qfunc_inv(d.delta) / kLn2,
            1e-6 * sc.sys.n_max};
}

TtpChannel TtpChannel::make(const Scenario& sc, int device) {
    const DeviceChannel& d = sc.devices.at(device);
    return {d.g_d * sc.sys.n0_tilde, sc.g_e * sc.sys.n0_tilde};
}

double dispersion(double gamma) {
    if (!(gamma >= 0.0)) throw DomainError("dispersion: SNR must be >= 0");
    const double u = 1.0 + gamma;
    return gamma * (gamma + 2.0) / (u * u);
}

double secrecy_capacity(double gamma_d, double gamma_e) {
    if (!(gamma_d >= 0.0) || !(gamma_e >= 0.0))
        throw DomainError("secrecy_capacity: SNRs must be >= 0");
    return (std::log1p(gamma_d) - std::log1p(gamma_e)) / kLn2;
}

double total_bits(double p_w, double n_units, const LinkParams& lp) {
    if (!(n_units > 0.0)) throw DomainError("total_bits: n_units must be > 0");
    if (!(p_w >= 0.0)) throw DomainError("total_bits: power must be >= 0");
    const double n_uses = n_units * lp.n0_tilde;
    const double gamma_d = p_w * lp.g_d / n_units;
    const double gamma_e = p_w * lp.g_e / n_units;
    return n_uses * secrecy_capacity(gamma_d, gamma_e) -
           std::sqrt(n_uses * dispersion(gamma_d)) * lp.qinv_eps / kLn2 -
           std::sqrt(n_uses * dispersion(gamma_e)) * lp.qinv_delta / kLn2;
}

RateParts power_parts(double p_w, const PowerSection& cs) {
    if (!(p_w >= 0.0)) throw DomainError("power_parts: power must be >= 0");
    const double s_d = p_w * cs.gain_d;
    const double s_e = p_w * cs.gain_e;
    RateParts parts;
    parts.capacity = cs.n_uses * (std::log1p(s_d) - std::log1p(s_e)) / kLn2;
    parts.penalty = cs.coef_d * sqrt_dispersion(s_d) + cs.coef_e * sqrt_dispersion(s_e);
    return parts;
}

double power_penalty_deriv(double p_w, const PowerSection& cs) {
    const double p = clamp_floor(p_w, cs.p_floor);
    if (!(p > 0.0)) throw DomainError("power_penalty_deriv: p and p_floor both zero");
    double out = 0.0;
    for (auto [gain, coef] : {std::pair{cs.gain_d, cs.coef_d}, std::pair{cs.gain_e, cs.coef_e}}) {
        if (gain == 0.0) continue;  // the corresponding penalty term is constant
        const double u = 1.0 + p * gain;
        out += gain * coef / (u * u * u * sqrt_dispersion(p * gain));
    }
    return out;
}

double power_capacity_deriv(double p_w, const PowerSection& cs) {
    const double p = clamp_floor(p_w, cs.p_floor);
    return cs.n_uses / kLn2 *
           (cs.gain_d / (1.0 + p * cs.gain_d) - cs.gain_e / (1.0 + p * cs.gain_e));
}

RateCurvature power_second_derivs(double p_w, const PowerSection& cs) {
    const double p = clamp_floor(p_w, cs.p_floor);
    if (!(p > 0.0)) throw DomainError("power_second_derivs: p and p_floor both zero");
    const double u_d = 1.0 + p * cs.gain_d;
    const double u_e = 1.0 + p * cs.gain_e;

    RateCurvature out;
    out.capacity = cs.n_uses / kLn2 * (cs.gain_e - cs.gain_d) / (u_d * u_e) *
                   (cs.gain_e / u_e + cs.gain_d / u_d);
    for (auto [gain, coef] : {std::pair{cs.gain_d, cs.coef_d}, std::pair{cs.gain_e, cs.coef_e}}) {
        if (gain == 0.0) continue;
        const double u = 1.0 + p * gain;
        const double inv_u2 = 1.0 / (u * u);
        const double v = dispersion(p * gain);
        out.penalty -=
            gain * gain * coef * (3.0 - 2.0 * inv_u2) / (u * u * u * u * v * std::sqrt(v));
    }
    return out;
}

double scaled_dispersion(double n_units, double ghat) {
    if (!(n_units > 0.0)) throw DomainError("scaled_dispersion: n_units must be > 0");
    if (!(ghat >= 0.0)) throw DomainError("scaled_dispersion: gain must be >= 0");
    const double u = n_units + ghat;
    return n_units - n_units * n_units * n_units / (u * u);
}

RateParts bandwidth_parts(double n_units, const BandwidthSection& cs) {
    const double n = clamp_floor(n_units, cs.n_floor);
    if (!(n > 0.0)) throw DomainError("bandwidth_parts: n_units must be > 0");
    RateParts parts;
    parts.capacity =
        cs.n0 * n * (std::log1p(cs.gain_d / n) - std::log1p(cs.gain_e / n)) / kLn2;
    parts.penalty = cs.coef_d * std::sqrt(scaled_dispersion(n, cs.gain_d)) +
                    cs.coef_e * std::sqrt(scaled_dispersion(n, cs.gain_e));
    return parts;
}

double bandwidth_penalty_deriv(double n_units, const BandwidthSection& cs) {
    const double n = clamp_floor(n_units, cs.n_floor);
    if (!(n > 0.0)) throw DomainError("bandwidth_penalty_deriv: n_units must be > 0");
    double out = 0.0;
    for (auto [gain, coef] : {std::pair{cs.gain_d, cs.coef_d}, std::pair{cs.gain_e, cs.coef_e}}) {
        if (gain == 0.0) continue;  // z is identically zero, so is its slope
        const double u = n + gain;
        out += coef * (3.0 * gain * gain * n + gain * gain * gain) /
               (2.0 * std::sqrt(scaled_dispersion(n, gain)) * u * u * u);
    }
    return out;
}

double bandwidth_capacity_deriv(double n_units, const BandwidthSection& cs) {
    const double n = clamp_floor(n_units, cs.n_floor);
    return cs.n0 / kLn2 *
           (std::log1p((cs.gain_d - cs.gain_e) / (n + cs.gain_e)) + n / (n + cs.gain_d) -
            n / (n + cs.gain_e));
}

RateCurvature bandwidth_second_derivs(double n_units, const BandwidthSection& cs) {
    const double n = clamp_floor(n_units, cs.n_floor);
    if (!(n > 0.0)) throw DomainError("bandwidth_second_derivs: n_units must be > 0");
    const double u_d = n + cs.gain_d;
    const double u_e = n + cs.gain_e;

    RateCurvature out;
    out.capacity = cs.n0 / kLn2 * (cs.gain_e - cs.gain_d) *
                   ((cs.gain_e + cs.gain_d) * n + 2.0 * cs.gain_e * cs.gain_d) /
                   (u_e * u_e * u_d * u_d);
    for (auto [gain, coef] : {std::pair{cs.gain_d, cs.coef_d}, std::pair{cs.gain_e, cs.coef_e}}) {
        if (gain == 0.0) continue;
        const double u = n + gain;
        const double z = scaled_dispersion(n, gain);
        const double z1 = (3.0 * gain * gain * n + gain * gain * gain) / (u * u * u);
        const double z2 = -6.0 * n * gain * gain / (u * u * u * u);
        out.penalty += coef * (2.0 * z2 * z - z1 * z1) / (4.0 * z * std::sqrt(z));
    }
    return out;
}

double approx_total_bits(double p_w, double n_uses, const TtpChannel& ch, double kappa) {
    if (!(n_uses > 0.0)) throw DomainError("approx_total_bits: n_uses must be > 0");
    if (!(p_w >= 0.0)) throw DomainError("approx_total_bits: power must be >= 0");
    return n_uses * (std::log1p(p_w * ch.h_d / n_uses) - std::log1p(p_w * ch.h_e / n_uses)) /
               kLn2 -
           std::sqrt(n_uses) * kappa;
}

double approx_total_bits(double p_w, double n_uses, const TtpChannel& ch, Probability eps,
                         Probability delta) {
    return approx_total_bits(p_w, n_uses, ch, penalty_per_sqrt_use(eps, delta));
}

double penalty_per_sqrt_use(Probability eps, Probability delta) {
    return (qfunc_inv(eps) + qfunc_inv(delta)) / kLn2;
}

}  // namespace secalloc

#include "secalloc/numerics.hpp"

#include <cmath>

#include "secalloc/errors.hpp"

namespace secalloc {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double qfunc_raw(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// Standard normal density.
double phi(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Rational approximation of the upper-tail quantile (Acklam's inverse
// normal CDF, negated). Good to ~1e-9 relative; Newton finishes the job.
double qinv_guess(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    // p <= 0.5 here, so only the lower-tail and central branches are needed;
    // both give Phi^-1(p), and Q^-1(p) = -Phi^-1(p).
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        const double num = ((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5];
        const double den = (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0;
        return -(num / den);
    }
    const double q = p - 0.5;
    const double r = q * q;
    const double num = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q;
    const double den = ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0;
    return -(num / den);
}

}  // namespace

Probability::Probability(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0))
        throw DomainError("probability must lie strictly inside (0,1)");
}

Probability qfunc(double x) {
    if (!std::isfinite(x)) throw DomainError("qfunc: non-finite argument");
    const double q = qfunc_raw(x);
    if (!(q > 0.0 && q < 1.0))
        throw DomainError("qfunc: tail probability underflowed out of (0,1)");
    return Probability(q);
}

double qfunc_inv(Probability prob) {
    const double p = prob.value();
    // 1 - p is exact for p >= 0.5, so the reflection costs no accuracy.
    if (p > 0.5) return -qfunc_inv(Probability(1.0 - p));
    if (p == 0.5) return 0.0;

    double x = qinv_guess(p);
    for (int it = 0; it < 8; ++it) {
        const double err = qfunc_raw(x) - p;
        if (std::abs(err) <= 1e-14 * p) break;
        x += err / phi(x);
    }
    return x;
}

double dbm_to_watt(double dbm) {
    if (!std::isfinite(dbm)) throw DomainError("dbm_to_watt: non-finite argument");
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double watt_to_dbm(double watts) {
    if (!(watts > 0.0)) throw DomainError("watt_to_dbm: power must be > 0");
    return 30.0 + 10.0 * std::log10(watts);
}

}  // namespace secalloc

#ifndef SECALLOC_NUMERICS_HPP
#define SECALLOC_NUMERICS_HPP

// Scalar special functions and unit conversions shared by every other
// module. All internal powers are watts, bandwidths Hz, times seconds;
// dBm/dB appear only at the CLI boundary.

namespace secalloc {

// Probability strictly inside (0,1). Boundary values are rejected because
// the inverse Gaussian tail diverges there.
class Probability {
public:
    explicit Probability(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

// Gaussian upper-tail probability Q(x) = 0.5 * erfc(x / sqrt(2)).
// Strictly decreasing. Throws DomainError for non-finite x or when the
// tail underflows out of (0,1) (|x| beyond ~38).
Probability qfunc(double x);

// Inverse of qfunc: the x with Q(x) = p. Rational initial guess refined by
// Newton steps until |Q(x) - p| <= 1e-13 * p.
double qfunc_inv(Probability p);

// 10^((d - 30) / 10)
double dbm_to_watt(double dbm);

// 30 + 10 log10(w); w must be > 0.
double watt_to_dbm(double watts);

}  // namespace secalloc

#endif

#ifndef SECALLOC_STEPPERS_HPP
#define SECALLOC_STEPPERS_HPP

#include <functional>
#include <string>
#include <string_view>
#include <vector>

// Interchangeable gradient-step strategies for the ascent/descent loops.
// The Runge-Kutta style kinds (Heun, Ralston) re-evaluate the gradient
// oracle at intermediate probe points; the finite-difference kind keeps
// the Euler update form and expects the caller to supply a gradient built
// from difference quotients of the objective (see fd_gradient).

namespace secalloc {

enum class FdScheme { Forward, Backward, Central };
enum class StepDirection { Ascent, Descent };

struct StepperKind {
    enum class Family { Euler, Heun, Ralston, FiniteDifference };

    Family family = Family::Euler;
    FdScheme scheme = FdScheme::Central;  // used by FiniteDifference only

    // CLI names: euler, heun, ralston, fd-forward, fd-backward, fd-central.
    static StepperKind parse(std::string_view name);
    std::string name() const;

    // True when the caller must differentiate the objective numerically
    // instead of passing an analytic gradient.
    bool wants_objective_differences() const noexcept {
        return family == Family::FiniteDifference;
    }
};

struct StepConfig {
    double h = 0.1;              // step size
    double fd_spacing = 1e-6;    // probe spacing for difference quotients
    StepDirection direction = StepDirection::Ascent;
};

using Point = std::vector<double>;
using ObjectiveFn = std::function<double(const Point&)>;
using GradientFn = std::function<Point(const Point&)>;
using ProjectionFn = std::function<Point(const Point&)>;

// Per-coordinate difference quotient of `objective` at y with spacing
// cfg.fd_spacing. Throws EvaluationError (with the coordinate index) when
// the objective is non-finite at a probe point.
Point fd_gradient(const ObjectiveFn& objective, const Point& y, const StepConfig& cfg,
                  FdScheme scheme);

// One update of the selected kind, starting from y:
//   Euler / FiniteDifference:  y + h g(y)
//   Heun:                      predict yt = y + h g(y), then y + h/2 (g(y) + g(yt))
//   Ralston:                   k1 = g(y), k2 = g(y + 3/4 h k1), y + h (k1/3 + 2 k2/3)
// Descent negates the oracle. Only the final point is projected; probe
// points are fed to the oracle as-is, so oracles must be total on the
// evaluation domain (solvers clamp inside their oracles).
Point grad_step(const StepperKind& kind, const Point& y, const GradientFn& grad,
                const StepConfig& cfg, const ProjectionFn& project);

}  // namespace secalloc

#endif

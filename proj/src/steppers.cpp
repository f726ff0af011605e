#include "secalloc/steppers.hpp"

#include <cmath>

#include "secalloc/errors.hpp"

namespace secalloc {

namespace {

Point axpy(const Point& y, double a, const Point& g) {
    Point out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * g[i];
    return out;
}

double checked_eval(const ObjectiveFn& objective, const Point& y, std::size_t coord) {
    const double v = objective(y);
    if (!std::isfinite(v))
        throw EvaluationError(coord, "objective non-finite at finite-difference probe");
    return v;
}

}  // namespace

StepperKind StepperKind::parse(std::string_view name) {
    if (name == "euler") return {Family::Euler, FdScheme::Central};
    if (name == "heun") return {Family::Heun, FdScheme::Central};
    if (name == "ralston") return {Family::Ralston, FdScheme::Central};
    if (name == "fd-forward") return {Family::FiniteDifference, FdScheme::Forward};
    if (name == "fd-backward") return {Family::FiniteDifference, FdScheme::Backward};
    if (name == "fd-central") return {Family::FiniteDifference, FdScheme::Central};
    throw ValidationError("stepper", "unknown kind '" + std::string(name) +
                                         "' (expected euler|heun|ralston|fd-forward|"
                                         "fd-backward|fd-central)");
}

std::string StepperKind::name() const {
    switch (family) {
        case Family::Euler: return "euler";
        case Family::Heun: return "heun";
        case Family::Ralston: return "ralston";
        case Family::FiniteDifference:
            switch (scheme) {
                case FdScheme::Forward: return "fd-forward";
                case FdScheme::Backward: return "fd-backward";
                case FdScheme::Central: return "fd-central";
            }
    }
    return "unknown";
}

Point fd_gradient(const ObjectiveFn& objective, const Point& y, const StepConfig& cfg,
                  FdScheme scheme) {
    if (!(cfg.fd_spacing > 0.0)) throw DomainError("fd_gradient: spacing must be > 0");
    const double dx = cfg.fd_spacing;
    Point grad(y.size());
    Point probe = y;
    const double at_y =
        (scheme == FdScheme::Central) ? 0.0 : checked_eval(objective, y, y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        switch (scheme) {
            case FdScheme::Forward: {
                probe[i] = y[i] + dx;
                grad[i] = (checked_eval(objective, probe, i) - at_y) / dx;
                break;
            }
            case FdScheme::Backward: {
                probe[i] = y[i] - dx;
                grad[i] = (at_y - checked_eval(objective, probe, i)) / dx;
                break;
            }
            case FdScheme::Central: {
                probe[i] = y[i] + dx;
                const double hi = checked_eval(objective, probe, i);
                probe[i] = y[i] - dx;
                const double lo = checked_eval(objective, probe, i);
                grad[i] = (hi - lo) / (2.0 * dx);
                break;
            }
        }
        probe[i] = y[i];
    }
    return grad;
}

Point grad_step(const StepperKind& kind, const Point& y, const GradientFn& grad,
                const StepConfig& cfg, const ProjectionFn& project) {
    if (!(cfg.h > 0.0)) throw DomainError("grad_step: step size must be > 0");
    const double sign = cfg.direction == StepDirection::Ascent ? 1.0 : -1.0;
    const double h = cfg.h;

    const auto signed_grad = [&](const Point& at) {
        Point g = grad(at);
        if (sign < 0.0)
            for (double& v : g) v = -v;
        return g;
    };

    switch (kind.family) {
        case StepperKind::Family::Euler:
        case StepperKind::Family::FiniteDifference: {
            return project(axpy(y, h, signed_grad(y)));
        }
        case StepperKind::Family::Heun: {
            const Point g0 = signed_grad(y);
            const Point g1 = signed_grad(axpy(y, h, g0));
            Point combined(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) combined[i] = 0.5 * (g0[i] + g1[i]);
            return project(axpy(y, h, combined));
        }
        case StepperKind::Family::Ralston: {
            const Point k1 = signed_grad(y);
            const Point k2 = signed_grad(axpy(y, 0.75 * h, k1));
            Point combined(y.size());
            for (std::size_t i = 0; i < y.size(); ++i)
                combined[i] = k1[i] / 3.0 + 2.0 * k2[i] / 3.0;
            return project(axpy(y, h, combined));
        }
    }
    throw SolverError("grad_step: unreachable stepper kind");
}

}  // namespace secalloc

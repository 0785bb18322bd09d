#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "cbfed/space.hpp"

namespace cbfed {

/// Pointwise boundary superpotential j with interval-valued Clarke
/// subdifferential and declared hypothesis constants (c0, c1, m).
/// Built-in kinds:
///   quadratic(c):       j = (c/2) x^2                       (convex, smooth)
///   absval(c):          j = c |x|                           (convex, kink at 0)
///   cos_nonconvex(d):   j = x^2/2 - d cos x                 (nonconvex, smooth)
///   jump_down(gap):     j = -gap * max(x, 0); the derivative jumps DOWN at 0,
///                       a deliberately relaxed-monotonicity-violating control.
struct Superpotential {
    enum class Kind { quadratic, absval, cos_nonconvex, jump_down };

    Kind kind = Kind::quadratic;
    double param = 0.0;       ///< c, c, delta, or gap depending on kind
    double c0 = 0.0, c1 = 0.0, m = 0.0;  ///< declared hypothesis constants

    static Superpotential quadratic(double c);
    static Superpotential absval(double c);
    static Superpotential cos_nonconvex(double delta);
    static Superpotential jump_down(double gap);

    double value(double xi) const;
    /// Clarke subdifferential as an ordered closed interval [lo, hi].
    std::pair<double, double> subdifferential(double xi) const;
    /// Generalized directional derivative j0(xi; dir) = max over the interval.
    double j0(double xi, double dir) const;
};

struct HypothesisFit {
    double c0_fit = 0.0, c1_fit = 0.0, m_fit = 0.0;
    bool h3_pass = false, h4_pass = false;
};

/// Sampling estimate of (c0, c1, m) over [lo, hi]; h3/h4 compare against the
/// declared constants.
HypothesisFit estimate_hypothesis_constants(const Superpotential& sp, int n_samples,
                                            double lo, double hi, std::uint64_t seed);

/// Boundary-lumped J(v) = sum_i w_i j(v_n(x_i)) over all boundary nodes.
double discrete_J(const ReducedSpace& space, const Superpotential& sp,
                  const Eigen::VectorXd& v);

/// Boundary-lumped sum_i w_i j0(u_n(x_i); v_n(x_i)).
double discrete_J0(const ReducedSpace& space, const Superpotential& sp,
                   const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Global minimizer of (1/(2*step))(x - target)^2 + weight * j(x).
/// Requires step * weight * m < 1 (declared weak-convexity bound).
double prox_1d(const Superpotential& sp, double weight, double target, double step);

} // namespace cbfed

#include "cbfed/superpotential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cbfed/errors.hpp"

namespace cbfed {

Superpotential Superpotential::quadratic(double c) {
    if (c < 0.0) throw InvalidParams("quadratic superpotential needs c >= 0");
    Superpotential sp;
    sp.kind = Kind::quadratic;
    sp.param = c;
    sp.c0 = 0.0;
    sp.c1 = c;
    sp.m = 0.0;
    return sp;
}

Superpotential Superpotential::absval(double c) {
    if (c < 0.0) throw InvalidParams("absval superpotential needs c >= 0");
    Superpotential sp;
    sp.kind = Kind::absval;
    sp.param = c;
    sp.c0 = c;
    sp.c1 = 0.0;
    sp.m = 0.0;
    return sp;
}

Superpotential Superpotential::cos_nonconvex(double delta) {
    if (delta < 0.0) throw InvalidParams("cos_nonconvex superpotential needs delta >= 0");
    Superpotential sp;
    sp.kind = Kind::cos_nonconvex;
    sp.param = delta;
    // j'(x) = x + delta sin x, |j'| <= delta + |x|; j'' >= 1 - delta.
    sp.c0 = delta;
    sp.c1 = 1.0;
    sp.m = std::max(0.0, delta - 1.0);
    return sp;
}

Superpotential Superpotential::jump_down(double gap) {
    if (gap < 0.0) throw InvalidParams("jump_down superpotential needs gap >= 0");
    Superpotential sp;
    sp.kind = Kind::jump_down;
    sp.param = gap;
    sp.c0 = gap;
    sp.c1 = 0.0;
    // Declared m = 0: the downward derivative jump makes the true relaxed
    // monotonicity defect unbounded, so hypothesis checks must fail.
    sp.m = 0.0;
    return sp;
}

double Superpotential::value(double xi) const {
    switch (kind) {
        case Kind::quadratic: return 0.5 * param * xi * xi;
        case Kind::absval: return param * std::abs(xi);
        case Kind::cos_nonconvex: return 0.5 * xi * xi - param * std::cos(xi);
        case Kind::jump_down: return -param * std::max(xi, 0.0);
    }
    return 0.0;
}

std::pair<double, double> Superpotential::subdifferential(double xi) const {
    switch (kind) {
        case Kind::quadratic: {
            const double d = param * xi;
            return {d, d};
        }
        case Kind::absval:
            if (xi > 0.0) return {param, param};
            if (xi < 0.0) return {-param, -param};
            return {-param, param};
        case Kind::cos_nonconvex: {
            const double d = xi + param * std::sin(xi);
            return {d, d};
        }
        case Kind::jump_down:
            if (xi > 0.0) return {-param, -param};
            if (xi < 0.0) return {0.0, 0.0};
            return {-param, 0.0};
    }
    return {0.0, 0.0};
}

double Superpotential::j0(double xi, double dir) const {
    const auto [lo, hi] = subdifferential(xi);
    return std::max(lo * dir, hi * dir);
}

HypothesisFit estimate_hypothesis_constants(const Superpotential& sp, int n_samples,
                                            double lo, double hi, std::uint64_t seed) {
    if (n_samples < 2) throw InvalidParams("estimate_hypothesis_constants: n_samples < 2");
    if (!(hi > lo)) throw DegenerateRange("estimate_hypothesis_constants: empty range");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> xi(static_cast<std::size_t>(n_samples));
    for (auto& x : xi) x = dist(rng);
    if (lo <= 0.0 && hi >= 0.0) xi.push_back(0.0);  // always probe the kink

    struct Pt { double x, y; };  // (|xi|, worst |zeta|)
    std::vector<Pt> pts;
    std::vector<std::pair<double, double>> sub;
    pts.reserve(xi.size());
    sub.reserve(xi.size());
    for (double x : xi) {
        const auto s = sp.subdifferential(x);
        sub.push_back(s);
        pts.push_back({std::abs(x), std::max(std::abs(s.first), std::abs(s.second))});
    }

    HypothesisFit fit;
    // H.4 defect: worst-case subgradient pairing per sample pair.
    for (std::size_t i = 0; i < xi.size(); ++i)
        for (std::size_t j = i + 1; j < xi.size(); ++j) {
            const double dx = xi[i] - xi[j];
            if (dx == 0.0) continue;
            const double dz = (dx > 0.0) ? (sub[i].first - sub[j].second)
                                         : (sub[i].second - sub[j].first);
            fit.m_fit = std::max(fit.m_fit, -(dz * dx) / (dx * dx));
        }
    fit.h4_pass = fit.m_fit <= sp.m * (1.0 + 1e-6) + 1e-12;

    // H.3 check against declared constants.
    fit.h3_pass = true;
    for (const auto& p : pts)
        if (p.y > sp.c0 + sp.c1 * p.x + 1e-9) fit.h3_pass = false;

    // Minimal affine majorant of |zeta| over |xi|: solve the tiny LP
    // min c0 + c1 s.t. c0 + c1 x_i >= y_i, c0 >= 0, c1 >= 0, using the upper
    // convex hull of the sample cloud.
    std::sort(pts.begin(), pts.end(),
              [](const Pt& a, const Pt& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    std::vector<Pt> hull;
    for (const auto& p : pts) {
        while (hull.size() >= 2) {
            const Pt& a = hull[hull.size() - 2];
            const Pt& b = hull.back();
            if ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y) >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    auto feasible = [&](double c0v, double c1v) {
        if (c0v < -1e-12 || c1v < -1e-12) return false;
        for (const auto& p : hull)
            if (c0v + c1v * p.x < p.y - 1e-12) return false;
        return true;
    };
    double best = std::numeric_limits<double>::infinity();
    double ymax = 0.0, slope_max = 0.0, y_at_0 = 0.0;
    for (const auto& p : hull) {
        ymax = std::max(ymax, p.y);
        if (p.x == 0.0) y_at_0 = std::max(y_at_0, p.y);
    }
    auto consider = [&](double c0v, double c1v) {
        c0v = std::max(c0v, 0.0);
        c1v = std::max(c1v, 0.0);
        if (feasible(c0v, c1v) && c0v + c1v < best) {
            best = c0v + c1v;
            fit.c0_fit = c0v;
            fit.c1_fit = c1v;
        }
    };
    consider(ymax, 0.0);  // horizontal majorant
    for (const auto& p : hull)
        if (p.x > 0.0) slope_max = std::max(slope_max, (p.y - y_at_0) / p.x);
    consider(y_at_0, slope_max);
    for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
        const Pt& a = hull[i];
        const Pt& b = hull[i + 1];
        if (b.x == a.x) continue;
        const double c1v = (b.y - a.y) / (b.x - a.x);
        consider(a.y - c1v * a.x, c1v);
        if (a.x > 0.0) consider(0.0, a.y / a.x);
        if (b.x > 0.0) consider(0.0, b.y / b.x);
    }
    return fit;
}

double discrete_J(const ReducedSpace& space, const Superpotential& sp,
                  const Eigen::VectorXd& v) {
    if (v.size() != space.reduced_dim)
        throw DimensionMismatch("discrete_J: coefficient length mismatch");
    const Eigen::VectorXd vn = space.trace_map * v;
    double J = 0.0;
    for (std::size_t i = 0; i < space.boundary_nodes.size(); ++i)
        J += space.boundary_nodes[i].weight * sp.value(vn[static_cast<Eigen::Index>(i)]);
    return J;
}

double discrete_J0(const ReducedSpace& space, const Superpotential& sp,
                   const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != space.reduced_dim || v.size() != space.reduced_dim)
        throw DimensionMismatch("discrete_J0: coefficient length mismatch");
    const Eigen::VectorXd un = space.trace_map * u;
    const Eigen::VectorXd vn = space.trace_map * v;
    double J0 = 0.0;
    for (std::size_t i = 0; i < space.boundary_nodes.size(); ++i)
        J0 += space.boundary_nodes[i].weight *
              sp.j0(un[static_cast<Eigen::Index>(i)], vn[static_cast<Eigen::Index>(i)]);
    return J0;
}

double prox_1d(const Superpotential& sp, double weight, double target, double step) {
    if (!(weight > 0.0) || !(step > 0.0))
        throw InvalidParams("prox_1d: weight and step must be positive");
    if (step * weight * sp.m >= 1.0)
        throw StepTooLarge("prox_1d: step * weight * m >= 1");
    const double tw = step * weight;
    switch (sp.kind) {
        case Superpotential::Kind::quadratic:
            return target / (1.0 + tw * sp.param);
        case Superpotential::Kind::absval: {
            const double thr = tw * sp.param;
            if (target > thr) return target - thr;
            if (target < -thr) return target + thr;
            return 0.0;
        }
        case Superpotential::Kind::cos_nonconvex: {
            // phi'(x) = (x - target)/step + weight (x + delta sin x) is
            // strictly increasing because step*weight*(delta-1) < 1.
            const double delta = sp.param;
            auto dphi = [&](double x) {
                return (x - target) / step + weight * (x + delta * std::sin(x));
            };
            double bound = (std::abs(target) / step + weight * delta) /
                               (1.0 / step + weight) + 1.0;
            double a = -bound, b = bound;
            for (int it = 0; it < 200 && b - a > 1e-16 * (1.0 + std::abs(a)); ++it) {
                const double mid = 0.5 * (a + b);
                (dphi(mid) > 0.0 ? b : a) = mid;
            }
            return 0.5 * (a + b);
        }
        case Superpotential::Kind::jump_down: {
            const double gap = sp.param;
            auto phi = [&](double x) {
                return (x - target) * (x - target) / (2.0 * step) + weight * sp.value(x);
            };
            const double xn = std::min(target, 0.0);
            const double xp = std::max(target + tw * gap, 0.0);
            return phi(xn) <= phi(xp) ? xn : xp;
        }
    }
    return target;
}

} // namespace cbfed

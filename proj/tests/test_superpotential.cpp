/// @file test_superpotential.cpp
/// Clarke subdifferential calculus, hypothesis constant estimation, the
/// boundary-lumped functional J, and the exact 1D proximal map.

#include <doctest.h>

#include <cmath>
#include <random>

#include "cbfed/errors.hpp"
#include "cbfed/superpotential.hpp"

using namespace cbfed;

TEST_CASE("subdifferential: hand values") {
    const auto quad = Superpotential::quadratic(3.0);
    CHECK(quad.subdifferential(1.0).first == doctest::Approx(3.0));
    CHECK(quad.subdifferential(1.0).second == doctest::Approx(3.0));

    const auto av = Superpotential::absval(2.0);
    CHECK(av.subdifferential(0.0).first == doctest::Approx(-2.0));
    CHECK(av.subdifferential(0.0).second == doctest::Approx(2.0));
    CHECK(av.subdifferential(1.5).first == doctest::Approx(2.0));
    CHECK(av.subdifferential(-1.5).second == doctest::Approx(-2.0));

    const auto cosn = Superpotential::cos_nonconvex(2.0);
    const double pi = std::acos(-1.0);
    CHECK(cosn.subdifferential(pi / 2).first == doctest::Approx(pi / 2 + 2.0));
    CHECK(cosn.subdifferential(pi / 2).second == doctest::Approx(pi / 2 + 2.0));

    // jump_down: derivative 0 below, -gap above; interval [-gap, 0] at the jump.
    const auto jd = Superpotential::jump_down(2.0);
    CHECK(jd.subdifferential(0.0).first == doctest::Approx(-2.0));
    CHECK(jd.subdifferential(0.0).second == doctest::Approx(0.0));
}

TEST_CASE("j0: maximization over the subdifferential interval") {
    const auto av = Superpotential::absval(1.0);
    CHECK(av.j0(0.0, -3.0) == doctest::Approx(3.0));
    CHECK(av.j0(0.0, 3.0) == doctest::Approx(3.0));
    const auto quad = Superpotential::quadratic(2.5);
    for (double xi : {-1.2, 0.0, 0.7})
        for (double dir : {-2.0, 0.0, 1.0})
            CHECK(quad.j0(xi, dir) == doctest::Approx(2.5 * xi * dir));
    CHECK(av.j0(0.4, 0.0) == 0.0);
    // Positive homogeneity in the direction.
    const auto cosn = Superpotential::cos_nonconvex(1.5);
    CHECK(cosn.j0(0.3, 4.0) == doctest::Approx(2.0 * cosn.j0(0.3, 2.0)));
}

TEST_CASE("declared hypothesis constants") {
    CHECK(Superpotential::quadratic(2.0).m == 0.0);
    CHECK(Superpotential::absval(2.0).m == 0.0);
    CHECK(Superpotential::cos_nonconvex(2.0).m == doctest::Approx(1.0));
    CHECK(Superpotential::cos_nonconvex(0.5).m == 0.0);  // delta <= 1: convex
    CHECK(Superpotential::jump_down(2.0).m == 0.0);      // deliberate lie (control)
}

TEST_CASE("estimate_hypothesis_constants") {
    const auto quad = Superpotential::quadratic(1.5);
    const auto fit_q = estimate_hypothesis_constants(quad, 2000, -4.0, 4.0, 1);
    CHECK(fit_q.m_fit == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(fit_q.h4_pass);
    CHECK(fit_q.h3_pass);
    CHECK(fit_q.c1_fit == doctest::Approx(1.5).epsilon(0.05));

    const auto cosn = Superpotential::cos_nonconvex(2.0);
    const auto fit_c = estimate_hypothesis_constants(cosn, 5000, -6.0, 6.0, 2);
    CHECK(fit_c.m_fit <= 1.0 + 1e-3);
    CHECK(fit_c.m_fit >= 0.9);
    CHECK(fit_c.h4_pass);

    const auto jd = Superpotential::jump_down(2.0);
    const auto fit_j = estimate_hypothesis_constants(jd, 5000, -1.0, 1.0, 3);
    CHECK_FALSE(fit_j.h4_pass);  // the negative control must fail H.4

    CHECK_THROWS_AS(estimate_hypothesis_constants(quad, 100, 2.0, 2.0, 1),
                    DegenerateRange);
}

TEST_CASE("discrete J on a reduced space") {
    const ReducedSpace space = build_reduced_space(generate_unit_square_mesh(3, 3), 1);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(space.reduced_dim);
    for (int i = 0; i < space.reduced_dim; ++i) v[i] = gauss(rng);

    // quadratic(c): J(v) = (c/2) sum w_i v_n(x_i)^2, computed independently.
    const Eigen::VectorXd trace = normal_trace(space, v);
    double expected = 0.0;
    for (std::size_t i = 0; i < space.boundary_nodes.size(); ++i)
        expected += 0.5 * 2.0 * space.boundary_nodes[i].weight *
                    trace[static_cast<Eigen::Index>(i)] *
                    trace[static_cast<Eigen::Index>(i)];
    CHECK(discrete_J(space, Superpotential::quadratic(2.0), v) ==
          doctest::Approx(expected).epsilon(1e-12));

    // j(0) = -delta for cos_nonconvex: zero field gives -delta * |Gamma|.
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(space.reduced_dim);
    CHECK(discrete_J(space, Superpotential::cos_nonconvex(2.0), zero) ==
          doctest::Approx(-2.0 * 4.0).epsilon(1e-12));
    CHECK(discrete_J(space, Superpotential::quadratic(1.0), zero) == 0.0);
    CHECK(discrete_J(space, Superpotential::absval(1.0), zero) == 0.0);

    CHECK(discrete_J0(space, Superpotential::absval(1.0), v, zero) == 0.0);

    // Local Lipschitz bound |J(u)-J(v)| <= L_R ||u-v||_V via (c0, c1, lambda0).
    Eigen::VectorXd u = v;
    u[0] += 0.3;
    const auto av = Superpotential::absval(1.5);
    double L = 0.0;
    for (const auto& bn : space.boundary_nodes) L += bn.weight;  // |Gamma| * c0-ish
    const Eigen::VectorXd tu = normal_trace(space, u);
    double diff_bound = 0.0;
    for (std::size_t i = 0; i < space.boundary_nodes.size(); ++i)
        diff_bound += space.boundary_nodes[i].weight * av.c0 *
                      std::abs(tu[static_cast<Eigen::Index>(i)] -
                               trace[static_cast<Eigen::Index>(i)]);
    CHECK(std::abs(discrete_J(space, av, u) - discrete_J(space, av, v)) <=
          diff_bound + 1e-12);
}

TEST_CASE("prox_1d: closed forms") {
    // quadratic: xi* = target / (1 + tau w c).
    CHECK(prox_1d(Superpotential::quadratic(3.0), 0.5, 2.0, 0.4) ==
          doctest::Approx(2.0 / (1.0 + 0.4 * 0.5 * 3.0)).epsilon(1e-14));
    // absval: soft threshold.
    const auto av = Superpotential::absval(2.0);
    CHECK(prox_1d(av, 0.5, 3.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(prox_1d(av, 0.5, -3.0, 1.0) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(prox_1d(av, 0.5, 0.7, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
    // Symmetry: even j, target 0 -> 0.
    CHECK(prox_1d(Superpotential::quadratic(1.0), 1.0, 0.0, 0.1) == 0.0);
    CHECK(prox_1d(av, 1.0, 0.0, 0.1) == 0.0);
}

TEST_CASE("prox_1d: 401-grid global optimality for every kind") {
    const Superpotential kinds[] = {
        Superpotential::quadratic(2.0), Superpotential::absval(1.5),
        Superpotential::cos_nonconvex(2.0), Superpotential::jump_down(1.0)};
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(-4.0, 4.0);
    std::uniform_real_distribution<double> uni01(0.05, 1.0);
    for (const auto& sp : kinds) {
        for (int s = 0; s < 50; ++s) {
            const double target = uni(rng);
            const double w = uni01(rng);
            double tau = uni01(rng);
            if (sp.m > 0.0) tau = std::min(tau, 0.9 / (w * sp.m));
            const double xs = prox_1d(sp, w, target, tau);
            auto obj = [&](double x) {
                return (x - target) * (x - target) / (2.0 * tau) + w * sp.value(x);
            };
            const double best = obj(xs);
            for (int g = 0; g <= 400; ++g) {
                const double x = target - 5.0 + 10.0 * g / 400.0;
                CHECK(best <= obj(x) + 1e-10);
            }
        }
    }
}

TEST_CASE("prox_1d: step bound for weakly convex kinds") {
    const auto cosn = Superpotential::cos_nonconvex(3.0);  // m = 2
    CHECK_THROWS_AS(prox_1d(cosn, 1.0, 0.0, 0.5), StepTooLarge);
    CHECK_NOTHROW(prox_1d(cosn, 1.0, 0.0, 0.49));
}

TEST_CASE("boundary weights sum to |Gamma| for both element orders") {
    for (int order : {1, 2}) {
        const ReducedSpace space =
            build_reduced_space(generate_rectangle_mesh(2.0, 1.0, 4, 2), order);
        double sum = 0.0;
        for (const auto& bn : space.boundary_nodes) sum += bn.weight;
        CHECK(sum == doctest::Approx(6.0).epsilon(1e-12));
    }
}

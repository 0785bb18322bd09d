/// @file test_inner_solver.cpp
/// Proximal-gradient inner minimizer against direct linear solves on smooth
/// instances, energy monotonicity, and the HVI residual certificate.

#include <doctest.h>

#include <random>

#include "cbfed/energy.hpp"
#include "cbfed/errors.hpp"
#include "cbfed/inner_solver.hpp"

using namespace cbfed;

namespace {

struct Instance {
    ReducedSpace space;
    AssembledForms forms;
};

Instance make_instance(int nx, int order) {
    Instance inst;
    inst.space = build_reduced_space(generate_unit_square_mesh(nx, nx), order);
    inst.forms = assemble_forms(inst.space);
    return inst;
}

Eigen::VectorXd random_field(int dim, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, scale);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
    return v;
}

// Direct solve of the normal equations for the fully quadratic energy
// (r = 1, kappa = 0, quadratic j):
//   (mu K + (alpha + beta) M + c P' diag(w) P) v = Psi.
Eigen::VectorXd quadratic_solution(const Instance& inst, const ModelParams& params,
                                   double c, const Eigen::VectorXd& psi) {
    const Eigen::VectorXd w = inst.space.boundary_weights();
    const Eigen::MatrixXd A = params.mu * inst.forms.K +
                              (params.alpha + params.beta) * inst.forms.M +
                              c * inst.space.trace_map.transpose() *
                                  w.asDiagonal() * inst.space.trace_map;
    return A.ldlt().solve(psi);
}

} // namespace

TEST_CASE("quadratic instance matches the direct linear solve") {
    const Instance inst = make_instance(4, 1);
    ModelParams params;
    params.r = 1.0;
    params.alpha = 2.0;
    params.beta = 0.5;
    const double c = 1.5;
    const Superpotential sp = Superpotential::quadratic(c);
    const int m = inst.space.reduced_dim;
    const Eigen::VectorXd f = random_field(m, 1, 0.3);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);

    const DiscreteEnergy energy = build_energy(inst.space, inst.forms, sp, params, f, zero);
    const Eigen::VectorXd expected = quadratic_solution(inst, params, c, f);
    const MinimizeResult res = minimize_energy(energy, zero, 1e-11, 200000);
    CHECK(res.converged);
    CHECK(v_norm(inst.forms, res.v - expected) < 1e-8);

    // Smooth j and kappa=0: the HVI residual at the exact stationary point.
    CHECK(hvi_residual(energy, expected, 100, 3) <= 1e-10);
    CHECK(hvi_residual(energy, res.v, 100, 3) <= 1e-9);
    // A perturbed field is flagged.
    Eigen::VectorXd off = expected;
    off[0] += 0.1;
    CHECK(hvi_residual(energy, off, 100, 3) > 1e-4);
}

TEST_CASE("lagged convection shifts the load consistently") {
    const Instance inst = make_instance(3, 1);
    ModelParams params;
    params.r = 2.0;
    params.alpha = 3.0;
    const Superpotential sp = Superpotential::quadratic(1.0);
    const int m = inst.space.reduced_dim;
    const Eigen::VectorXd f = random_field(m, 2, 0.2);
    const Eigen::VectorXd w = random_field(m, 3, 0.2);
    const DiscreteEnergy energy = build_energy(inst.space, inst.forms, sp, params, f, w);
    CHECK((energy.load - (f - convection_load(inst.forms, w))).norm() == 0.0);
    // b(w,w,w) = 0 means the convection load never works against w itself.
    CHECK(std::abs(convection_load(inst.forms, w).dot(w)) <
          1e-12 * std::pow(v_norm(inst.forms, w), 3));
}

TEST_CASE("energy decreases monotonically along the iteration") {
    const Instance inst = make_instance(4, 1);
    ModelParams params;
    params.r = 3.0;
    params.q = 2.0;
    params.kappa = -0.5;
    params.alpha = 9.0;
    const Superpotential sp = Superpotential::absval(1.0);
    const int m = inst.space.reduced_dim;
    const Eigen::VectorXd f = random_field(m, 4, 0.5);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
    const DiscreteEnergy energy = build_energy(inst.space, inst.forms, sp, params, f, zero);

    const Eigen::VectorXd v0 = random_field(m, 5, 1.0);
    const MinimizeResult res = minimize_energy(energy, v0, 1e-10, 200000);
    CHECK(res.converged);
    CHECK(energy.value(res.v) <= energy.value(v0) + 1e-14);
    CHECK(hvi_residual(energy, res.v, 200, 6) <= 1e-8);
}

TEST_CASE("two distant starts reach the same minimizer (convex case)") {
    const Instance inst = make_instance(3, 1);
    ModelParams params;
    params.r = 3.0;
    params.alpha = 2.0;
    const Superpotential sp = Superpotential::absval(0.7);
    const int m = inst.space.reduced_dim;
    const Eigen::VectorXd f = random_field(m, 8, 0.4);
    const DiscreteEnergy energy = build_energy(inst.space, inst.forms, sp, params, f,
                                               Eigen::VectorXd::Zero(m));
    const MinimizeResult a =
        minimize_energy(energy, Eigen::VectorXd::Zero(m), 1e-11, 300000);
    const MinimizeResult b = minimize_energy(energy, random_field(m, 9, 2.0), 1e-11,
                                             300000);
    CHECK(v_norm(inst.forms, a.v - b.v) < 1e-7);
}

TEST_CASE("nonconvex superpotential within the weak-convexity budget") {
    const Instance inst = make_instance(3, 1);
    ModelParams params;
    params.r = 2.0;
    params.alpha = 6.0;
    const Superpotential sp = Superpotential::cos_nonconvex(2.0);  // m = 1
    const int m = inst.space.reduced_dim;
    const Eigen::VectorXd f = random_field(m, 10, 0.3);
    const DiscreteEnergy energy = build_energy(inst.space, inst.forms, sp, params, f,
                                               Eigen::VectorXd::Zero(m));
    const MinimizeResult res =
        minimize_energy(energy, Eigen::VectorXd::Zero(m), 1e-10, 300000);
    CHECK(res.converged);
    CHECK(hvi_residual(energy, res.v, 200, 11) <= 1e-8);
}

TEST_CASE("order-2 elements work through the same pipeline") {
    const Instance inst = make_instance(2, 2);
    ModelParams params;
    params.r = 2.0;
    params.alpha = 4.0;
    const Superpotential sp = Superpotential::quadratic(1.0);
    const int m = inst.space.reduced_dim;
    const Eigen::VectorXd f = random_field(m, 12, 0.2);
    const DiscreteEnergy energy = build_energy(inst.space, inst.forms, sp, params, f,
                                               Eigen::VectorXd::Zero(m));
    const MinimizeResult res =
        minimize_energy(energy, Eigen::VectorXd::Zero(m), 1e-10, 300000);
    CHECK(res.converged);
    CHECK(hvi_residual(energy, res.v, 100, 13) <= 1e-8);
}

TEST_CASE("iteration budget exhaustion carries the best iterate") {
    const Instance inst = make_instance(3, 1);
    ModelParams params;
    params.alpha = 2.0;
    const Superpotential sp = Superpotential::quadratic(1.0);
    const int m = inst.space.reduced_dim;
    const Eigen::VectorXd f = random_field(m, 14, 0.5);
    const DiscreteEnergy energy = build_energy(inst.space, inst.forms, sp, params, f,
                                               Eigen::VectorXd::Zero(m));
    try {
        minimize_energy(energy, Eigen::VectorXd::Zero(m), 1e-14, 2);
        FAIL("expected MaxIterExceeded");
    } catch (const MaxIterExceeded& e) {
        CHECK(static_cast<int>(e.best_iterate.size()) == m);
    }
}

TEST_CASE("start vector length is validated") {
    const Instance inst = make_instance(2, 1);
    ModelParams params;
    const Superpotential sp = Superpotential::quadratic(1.0);
    const int m = inst.space.reduced_dim;
    const DiscreteEnergy energy =
        build_energy(inst.space, inst.forms, sp, params, Eigen::VectorXd::Zero(m),
                     Eigen::VectorXd::Zero(m));
    CHECK_THROWS_AS(minimize_energy(energy, Eigen::VectorXd::Zero(m + 1), 1e-8, 100),
                    DimensionMismatch);
}

/// @file test_outer_solver.cpp
/// Picard outer iteration with certified error estimators, homotopy
/// continuation, data dependence, and deterministic CSV artifacts.

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "cbfed/errors.hpp"
#include "cbfed/outer_solver.hpp"

using namespace cbfed;

namespace {

struct Fixture {
    ReducedSpace space;
    AssembledForms forms;
    ModelParams params;
    Superpotential sp = Superpotential::quadratic(1.0);

    Fixture() {
        space = build_reduced_space(generate_unit_square_mesh(4, 4), 1);
        forms = assemble_forms(space);
        params.r = 3.0;
        params.q = 2.0;
        params.kappa = -0.5;
        params.alpha = 9.0;  // above varrho_r = 8
    }

    Eigen::VectorXd forcing(double scale, std::uint64_t seed = 1) const {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, scale);
        Eigen::VectorXd f(space.reduced_dim);
        for (int i = 0; i < space.reduced_dim; ++i) f[i] = gauss(rng);
        return f;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("picard converges with certified estimators") {
    const Fixture fx;
    SolveOptions opts;
    opts.tol = 1e-9;
    const Eigen::VectorXd f = fx.forcing(0.3);
    const SolveResult res =
        picard_solve(fx.space, fx.forms, fx.params, fx.sp, f, opts);

    REQUIRE(res.report.converged);
    const double sigma = res.report.sigma_f;
    CHECK(sigma < 1.0);
    CHECK(sigma > 0.0);
    REQUIRE(res.report.iterates.size() >= 2);

    // Reference solution at 100x tighter tolerance.
    SolveOptions tight = opts;
    tight.tol = opts.tol / 100.0;
    const SolveResult ref =
        picard_solve(fx.space, fx.forms, fx.params, fx.sp, f, tight);

    // Replay the iteration to recover each iterate for the error audit.
    Eigen::VectorXd u = Eigen::VectorXd::Zero(fx.space.reduced_dim);
    const double inner_tol = opts.tol / 100.0;
    for (const auto& rec : res.report.iterates) {
        const DiscreteEnergy energy =
            build_energy(fx.space, fx.forms, fx.sp, fx.params, f, u);
        u = minimize_energy(energy, u, inner_tol, 200000).v;
        const double true_err = v_norm(fx.forms, u - ref.u);
        CHECK(rec.apost + 1e-12 >= true_err);            // a-post dominates truth
        CHECK(rec.apriori >= rec.apost - 1e-10);          // a-priori dominates a-post
        CHECK(rec.norm_V <= res.report.constants.rho_f + 1e-8);  // K_f self-map
    }

    // Final stopping rule: step below tol*(1-sigma)/sigma certifies tol.
    CHECK(res.report.iterates.back().step_V <=
          opts.tol * (1.0 - sigma) / sigma + 1e-15);
    CHECK(v_norm(fx.forms, res.u - ref.u) <= opts.tol * 1.01);
}

TEST_CASE("uniform energy bound holds at the solution") {
    const Fixture fx;
    SolveOptions opts;
    const Eigen::VectorXd f = fx.forcing(0.3);
    const SolveResult res =
        picard_solve(fx.space, fx.forms, fx.params, fx.sp, f, opts);
    const auto [lhs, rhs] =
        uniform_bound_sides(fx.forms, fx.params, res.report.constants, res.u,
                            res.report.constants.f_norm);
    CHECK(lhs <= rhs + 1e-8);
}

TEST_CASE("uncertified regimes are refused unless forced") {
    Fixture fx;
    fx.params.alpha = 1.0;  // below varrho_r: infeasible
    SolveOptions opts;
    const Eigen::VectorXd f = fx.forcing(0.05);
    CHECK_THROWS_AS(picard_solve(fx.space, fx.forms, fx.params, fx.sp, f, opts),
                    NotContractive);
    opts.force = true;
    const SolveResult res =
        picard_solve(fx.space, fx.forms, fx.params, fx.sp, f, opts);
    CHECK(res.report.converged);  // plain-tol fall-back still iterates
}

TEST_CASE("homotopy reaches t=1 in the global regime") {
    Fixture fx;
    fx.params.r = 5.0;
    fx.params.alpha = 9.0;  // above varrho_{1/2,5} + varrho_hat_{1/2,5} ~ 6.8
    SolveOptions opts;
    opts.tol = 1e-9;
    const Eigen::VectorXd f = fx.forcing(2.0);
    const SolveResult res =
        homotopy_solve(fx.space, fx.forms, fx.params, fx.sp, f, 8, opts);
    REQUIRE(res.report.converged);
    CHECK(res.report.iterates.size() == 8);
    CHECK(res.report.iterates.back().energy == doctest::Approx(1.0));  // t column
    // Every accepted step stored both sides of the uniform bound.
    for (const auto& rec : res.report.iterates) CHECK(rec.apost <= rec.apriori + 1e-8);
    // The final field solves the full-load problem.
    const DiscreteEnergy energy =
        build_energy(fx.space, fx.forms, fx.sp, fx.params, f, res.u);
    const Eigen::VectorXd resolved = minimize_energy(energy, res.u, 1e-11, 300000).v;
    CHECK(v_norm(fx.forms, resolved - res.u) < 1e-6);
}

TEST_CASE("homotopy refuses a failing global condition") {
    Fixture fx;  // r=3 with default C_gn: global condition fails at this alpha
    fx.params.alpha = 8.5;
    SolveOptions opts;
    const Eigen::VectorXd f = fx.forcing(40.0);
    CHECK_THROWS_AS(homotopy_solve(fx.space, fx.forms, fx.params, fx.sp, f, 4, opts),
                    NotContractive);
}

TEST_CASE("data dependence bound holds for perturbation pairs") {
    const Fixture fx;
    SolveOptions opts;
    opts.tol = 1e-9;
    const Eigen::VectorXd f1 = fx.forcing(0.3, 1);
    for (std::uint64_t s = 2; s <= 4; ++s) {
        const Eigen::VectorXd f2 = f1 + fx.forcing(0.05, s);
        const DataDependence dd = data_dependence_check(fx.space, fx.forms, fx.params,
                                                        fx.sp, f1, f2, opts);
        CHECK(dd.holds);
        CHECK(dd.distance <= dd.bound + 1e-6);
        CHECK(dd.lhs <= dd.rhs + 1e-6);
    }
}

TEST_CASE("CSV artifacts: exact header and byte-identical reruns") {
    const Fixture fx;
    SolveOptions opts;
    const Eigen::VectorXd f = fx.forcing(0.3);
    const SolveResult res =
        picard_solve(fx.space, fx.forms, fx.params, fx.sp, f, opts);

    const std::string p1 = "test_outer_iterates_1.csv";
    const std::string p2 = "test_outer_iterates_2.csv";
    write_iterates_csv(p1, res.report);
    write_iterates_csv(p2, res.report);
    const std::string text = slurp(p1);
    CHECK(text == slurp(p2));
    CHECK(text.substr(0, text.find('\n')) ==
          "k,step_V,norm_V,norm_Lr1,energy,inner_iters,apost,apriori");

    const SolveResult res2 =
        picard_solve(fx.space, fx.forms, fx.params, fx.sp, f, opts);
    write_iterates_csv(p2, res2.report);
    CHECK(text == slurp(p2));  // the whole pipeline is deterministic

    write_field_csv(p1, res.u);
    write_field_csv(p2, res2.u);
    CHECK(slurp(p1) == slurp(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("input validation") {
    const Fixture fx;
    SolveOptions opts;
    CHECK_THROWS_AS(picard_solve(fx.space, fx.forms, fx.params, fx.sp,
                                 Eigen::VectorXd::Zero(3), opts),
                    DimensionMismatch);
    CHECK_THROWS_AS(homotopy_solve(fx.space, fx.forms, fx.params, fx.sp,
                                   fx.forcing(0.1), 0, opts),
                    InvalidParams);
}

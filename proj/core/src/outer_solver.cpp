#include "cbfed/outer_solver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cbfed/errors.hpp"

namespace cbfed {

namespace {

ConstantsReport make_constants(const ReducedSpace& space, const AssembledForms& forms,
                               const ModelParams& params, const Superpotential& sp,
                               double f_norm, const SolveOptions& opts) {
    const double lambda0 = principal_eigenvalue(space, forms);
    const double Cb = estimate_Cb(space, forms, opts.cb_samples, opts.seed);
    return regime_check(params, lambda0, sp.m, sp.c0, space.mesh.boundary_length(),
                        space.mesh.area(), Cb, f_norm, opts.C_gn);
}

SolveResult picard_core(const ReducedSpace& space, const AssembledForms& forms,
                        const ModelParams& params, const Superpotential& sp,
                        const Eigen::VectorXd& f_vec, const SolveOptions& opts,
                        const ConstantsReport& constants) {
    const double sigma = constants.sigma_f;
    if (!opts.force && !(constants.regime == Regime::contraction_small_data ||
                         constants.regime == Regime::global_supercritical))
        throw NotContractive("picard_solve: no certificate (" + constants.condition +
                             "); pass force to iterate anyway");
    if (!opts.force && sigma >= 1.0)
        throw NotContractive("picard_solve: sigma_f >= 1");

    const bool certified = sigma < 1.0;
    // ‖u_k - u_{k-1}‖ <= tol (1 - sigma)/sigma guarantees ‖u_k - u*‖ <= tol.
    const double threshold =
        certified ? opts.tol * (1.0 - sigma) / std::max(sigma, 1e-16) : opts.tol;
    const double inner_tol = opts.inner_tol > 0.0 ? opts.inner_tol : opts.tol / 100.0;

    SolveResult res;
    res.report.constants = constants;
    res.report.sigma_f = sigma;

    Eigen::VectorXd u = opts.u0.size() > 0 ? opts.u0
                                           : Eigen::VectorXd::Zero(space.reduced_dim);
    if (u.size() != space.reduced_dim)
        throw DimensionMismatch("picard_solve: initial guess length mismatch");

    double step1 = 0.0;
    for (int k = 1; k <= opts.kmax; ++k) {
        const DiscreteEnergy energy = build_energy(space, forms, sp, params, f_vec, u);
        const MinimizeResult inner =
            minimize_energy(energy, u, inner_tol, opts.inner_max_iter);
        const Eigen::VectorXd u_new = inner.v;
        const double step = v_norm(forms, u_new - u);
        if (k == 1) step1 = step;

        IterationRecord rec;
        rec.k = k;
        rec.step_V = step;
        rec.norm_V = v_norm(forms, u_new);
        rec.norm_Lr1 = lp_norm(forms, u_new, params.r + 1.0);
        rec.energy = energy.value(u_new);
        rec.inner_iters = inner.iterations;
        const double amp = certified ? sigma / (1.0 - sigma)
                                     : std::numeric_limits<double>::infinity();
        rec.apost = amp * step;
        rec.apriori = certified ? std::pow(sigma, k - 1) * amp * step1 : rec.apost;
        res.report.iterates.push_back(rec);

        u = u_new;
        if (step <= threshold) {
            res.report.converged = true;
            res.u = u;
            return res;
        }
    }
    throw MaxIterExceeded("picard_solve: outer budget exhausted",
                          std::vector<double>(u.data(), u.data() + u.size()));
}

} // namespace

SolveResult picard_solve(const ReducedSpace& space, const AssembledForms& forms,
                         const ModelParams& params, const Superpotential& sp,
                         const Eigen::VectorXd& f_vec, const SolveOptions& opts) {
    params.validate();
    if (f_vec.size() != space.reduced_dim)
        throw DimensionMismatch("picard_solve: load length mismatch");
    const ConstantsReport constants =
        make_constants(space, forms, params, sp, dual_norm(forms, f_vec), opts);
    return picard_core(space, forms, params, sp, f_vec, opts, constants);
}

std::pair<double, double> uniform_bound_sides(const AssembledForms& forms,
                                              const ModelParams& params,
                                              const ConstantsReport& constants,
                                              const Eigen::VectorXd& u,
                                              double f_norm) {
    const double mu_eff = constants.mu_eff;
    const double nv = v_norm(forms, u);
    const double nr = lp_norm(forms, u, params.r + 1.0);
    const double lhs =
        mu_eff * nv * nv + params.beta * std::pow(nr, params.r + 1.0);
    double pump = 0.0;
    if (params.kappa != 0.0)
        pump = 2.0 * std::pow(std::abs(params.kappa),
                              (params.r + 1.0) / (params.r - params.q)) *
               constants.area;
    const double forcing =
        constants.c0 * std::sqrt(constants.gamma_len / constants.lambda0) + f_norm;
    const double rhs = pump + forcing * forcing / mu_eff;
    return {lhs, rhs};
}

SolveResult homotopy_solve(const ReducedSpace& space, const AssembledForms& forms,
                           const ModelParams& params, const Superpotential& sp,
                           const Eigen::VectorXd& f_vec, int t_steps,
                           const SolveOptions& opts) {
    params.validate();
    if (t_steps < 1) throw InvalidParams("homotopy_solve: t_steps must be >= 1");
    if (f_vec.size() != space.reduced_dim)
        throw DimensionMismatch("homotopy_solve: load length mismatch");

    const double f_norm = dual_norm(forms, f_vec);
    const ConstantsReport constants =
        make_constants(space, forms, params, sp, f_norm, opts);
    if (!opts.force && !constants.global_condition)
        throw NotContractive("homotopy_solve: global condition fails (" +
                             constants.condition + ")");

    SolveResult res;
    res.report.constants = constants;
    res.report.sigma_f = constants.sigma_f;

    const double dt0 = 1.0 / t_steps;
    const double dt_min = 1.0 / 1024.0;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(space.reduced_dim);
    double t = 0.0;
    int k = 0;
    while (t < 1.0 - 1e-15) {
        // Next uniform grid point, then adaptive halving on inner failure.
        double target = std::min(1.0, (std::floor(t / dt0 + 0.5) + 1.0) * dt0);
        Eigen::VectorXd u_next;
        int inner_total = 0;
        for (;;) {
            SolveOptions sub = opts;
            sub.force = true;
            sub.u0 = u;
            try {
                SolveResult step = picard_core(space, forms, params, sp,
                                               (target * f_vec).eval(), sub, constants);
                u_next = step.u;
                for (const auto& rec : step.report.iterates)
                    inner_total += rec.inner_iters;
                break;
            } catch (const MaxIterExceeded&) {
                const double dt = target - t;
                if (dt <= dt_min + 1e-15) throw;
                target = t + 0.5 * dt;
            }
        }
        const auto [lhs, rhs] =
            uniform_bound_sides(forms, params, constants, u_next, f_norm);
        if (lhs > rhs + 1e-8)
            throw BoundViolated("homotopy_solve: uniform bound violated at t = " +
                                std::to_string(target));

        IterationRecord rec;
        rec.k = ++k;
        rec.step_V = v_norm(forms, u_next - u);
        rec.norm_V = v_norm(forms, u_next);
        rec.norm_Lr1 = lp_norm(forms, u_next, params.r + 1.0);
        rec.energy = target;  // continuation parameter of this record
        rec.inner_iters = inner_total;
        rec.apost = lhs;
        rec.apriori = rhs;
        res.report.iterates.push_back(rec);

        u = u_next;
        t = target;
    }
    res.report.converged = true;
    res.u = u;
    return res;
}

DataDependence data_dependence_check(const ReducedSpace& space,
                                     const AssembledForms& forms,
                                     const ModelParams& params,
                                     const Superpotential& sp,
                                     const Eigen::VectorXd& f1,
                                     const Eigen::VectorXd& f2,
                                     const SolveOptions& opts) {
    SolveOptions o1 = opts, o2 = opts;
    const SolveResult r1 = picard_solve(space, forms, params, sp, f1, o1);
    const SolveResult r2 = picard_solve(space, forms, params, sp, f2, o2);
    const double mu_eff = r1.report.constants.mu_eff;

    DataDependence dd;
    dd.distance = v_norm(forms, r1.u - r2.u);
    const double delta = dual_norm(forms, f1 - f2);
    dd.bound = std::sqrt(2.0) * delta / mu_eff;
    dd.lhs = 0.5 * mu_eff * dd.distance * dd.distance;
    dd.rhs = delta * delta / mu_eff;
    // Each solve certifies ‖u_i - u_i*‖_V <= tol; absorb that into the slack.
    const double slack =
        2.0 * mu_eff * opts.tol * (dd.distance + 2.0 * opts.tol) + 1e-12;
    dd.holds = dd.lhs <= dd.rhs + slack;
    return dd;
}

void write_iterates_csv(const std::string& path, const IterationReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_iterates_csv: cannot open " + path);
    out << "k,step_V,norm_V,norm_Lr1,energy,inner_iters,apost,apriori\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (const auto& rec : report.iterates)
        out << rec.k << ',' << num(rec.step_V) << ',' << num(rec.norm_V) << ','
            << num(rec.norm_Lr1) << ',' << num(rec.energy) << ',' << rec.inner_iters
            << ',' << num(rec.apost) << ',' << num(rec.apriori) << '\n';
}

void write_field_csv(const std::string& path, const Eigen::VectorXd& u) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_field_csv: cannot open " + path);
    out << "i,coeff\n";
    char buf[64];
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", u[i]);
        out << i << ',' << buf << '\n';
    }
}

} // namespace cbfed

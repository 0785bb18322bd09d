#include "cbfed/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "cbfed/errors.hpp"
#include "cbfed/inner_solver.hpp"
#include "cbfed/oracle.hpp"
#include "fem_util.hpp"

namespace cbfed {

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
    if (dir.empty()) return name;
    return (std::filesystem::path(dir) / name).string();
}

Superpotential superpotential_from(const Config& cfg) {
    const std::string kind = cfg.get_string("superpotential.kind", "quadratic");
    if (kind == "quadratic")
        return Superpotential::quadratic(cfg.get_double("superpotential.c", 1.0));
    if (kind == "absval")
        return Superpotential::absval(cfg.get_double("superpotential.c", 1.0));
    if (kind == "cos_nonconvex")
        return Superpotential::cos_nonconvex(cfg.get_double("superpotential.delta", 2.0));
    if (kind == "jump_down")
        return Superpotential::jump_down(cfg.get_double("superpotential.gap", 1.0));
    throw BadConfig("superpotential.kind: unknown kind `" + kind + "`");
}

ConstantsReport constants_for(const Problem& prob) {
    const double lambda0 = principal_eigenvalue(prob.space, prob.forms);
    const double Cb = estimate_Cb(prob.space, prob.forms, prob.opts.cb_samples,
                                  prob.opts.seed);
    return regime_check(prob.params, lambda0, prob.sp.m, prob.sp.c0,
                        prob.space.mesh.boundary_length(), prob.space.mesh.area(), Cb,
                        dual_norm(prob.forms, prob.f_vec), prob.opts.C_gn);
}

void write_constants_csv(const std::string& path, const ConstantsReport& c) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    out << "name,value\n";
    out << "lambda0," << fmt(c.lambda0) << "\nCb," << fmt(c.Cb) << "\nm," << fmt(c.m)
        << "\nc0," << fmt(c.c0) << "\nmu_eff," << fmt(c.mu_eff) << "\nvarrho_r,"
        << fmt(c.varrho_r) << "\nvarrho_2r," << fmt(c.varrho_2r) << "\nvarrho_half,"
        << fmt(c.varrho_half) << "\nvarrho_hat_half," << fmt(c.varrho_hat_half)
        << "\nrho_f," << fmt(c.rho_f) << "\nsigma_f," << fmt(c.sigma_f)
        << "\nupsilon_f," << fmt(c.upsilon_f) << "\nrho," << fmt(c.rho) << "\nf_norm,"
        << fmt(c.f_norm) << "\narea," << fmt(c.area) << "\ngamma_len,"
        << fmt(c.gamma_len) << "\nregime," << regime_name(c.regime) << "\n";
}

void write_convergence_plot(const std::string& out_dir, const IterationReport& rep) {
    {
        std::ofstream out(join(out_dir, "convergence.dat"), std::ios::binary);
        out << "# k step_V apost apriori\n";
        for (const auto& r : rep.iterates)
            out << r.k << ' ' << fmt(r.step_V) << ' ' << fmt(r.apost) << ' '
                << fmt(r.apriori) << '\n';
    }
    std::ofstream gp(join(out_dir, "convergence.gp"), std::ios::binary);
    gp << "set logscale y\n"
          "set xlabel 'outer iteration k'\n"
          "set ylabel 'V-norm'\n"
          "plot 'convergence.dat' using 1:2 with linespoints title 'step', \\\n"
          "     'convergence.dat' using 1:3 with lines title 'a-posteriori', \\\n"
          "     'convergence.dat' using 1:4 with lines title 'a-priori'\n";
}

} // namespace

int worker_thread_cap() {
    if (const char* env = std::getenv("CBFED_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

Eigen::VectorXd assemble_forcing(const ReducedSpace& space, const std::string& kind,
                                 double fx, double fy, double scale) {
    double width = 0.0, height = 0.0;
    for (const auto& v : space.mesh.vertices) {
        width = std::max(width, v.x());
        height = std::max(height, v.y());
    }
    auto field = [&](const Eigen::Vector2d& p) -> Eigen::Vector2d {
        if (kind == "constant") return scale * Eigen::Vector2d(fx, fy);
        if (kind == "vortex")
            return scale * Eigen::Vector2d(-(p.y() - 0.5 * height), p.x() - 0.5 * width);
        if (kind == "shear") return scale * Eigen::Vector2d(p.y() - 0.5 * height, 0.0);
        if (kind == "boundary_layer")
            return scale * Eigen::Vector2d(std::exp(-10.0 * p.y() / height), 0.0);
        throw BadConfig("forcing.kind: unknown kind `" + kind + "`");
    };

    const auto& quad = fem::TriQuad::get();
    const int npe = fem::nodes_per_elem(space.order);
    Eigen::VectorXd f_full = Eigen::VectorXd::Zero(space.full_dim);
    double N[6];
    for (std::size_t t = 0; t < space.mesh.triangles.size(); ++t) {
        const auto& tri = space.mesh.triangles[t];
        const Eigen::Vector2d p0 = space.mesh.vertices[static_cast<std::size_t>(tri[0])];
        const Eigen::Vector2d p1 = space.mesh.vertices[static_cast<std::size_t>(tri[1])];
        const Eigen::Vector2d p2 = space.mesh.vertices[static_cast<std::size_t>(tri[2])];
        const double area =
            0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                   (p2.x() - p0.x()) * (p1.y() - p0.y()));
        for (int qp = 0; qp < fem::TriQuad::n; ++qp) {
            const Eigen::Vector2d ref = quad.pts[static_cast<std::size_t>(qp)];
            const Eigen::Vector2d phys =
                p0 + ref.x() * (p1 - p0) + ref.y() * (p2 - p0);
            const Eigen::Vector2d val = field(phys);
            const double w = quad.w[static_cast<std::size_t>(qp)] * area;
            fem::shape_values(space.order, ref.x(), ref.y(), N);
            for (int k = 0; k < npe; ++k) {
                const int node = space.elem_nodes[t][static_cast<std::size_t>(k)];
                f_full[2 * node] += w * N[k] * val.x();
                f_full[2 * node + 1] += w * N[k] * val.y();
            }
        }
    }
    return space.basis.transpose() * f_full;
}

Problem build_problem(const Config& cfg) {
    const double width = cfg.get_double("mesh.width", 1.0);
    const double height = cfg.get_double("mesh.height", 1.0);
    const int nx = cfg.get_int("mesh.nx", 8);
    const int ny = cfg.get_int("mesh.ny", nx);
    const int order = cfg.get_int("mesh.order", 1);
    if (order != 1 && order != 2) throw BadConfig("mesh.order must be 1 or 2");

    Problem prob;
    prob.space = build_reduced_space(generate_rectangle_mesh(width, height, nx, ny),
                                     order);
    prob.forms = assemble_forms(prob.space);

    prob.params.mu = cfg.get_double("model.mu", 1.0);
    prob.params.alpha = cfg.get_double("model.alpha", 1.0);
    prob.params.beta = cfg.get_double("model.beta", 1.0);
    prob.params.kappa = cfg.get_double("model.kappa", 0.0);
    prob.params.r = cfg.get_double("model.r", 2.0);
    prob.params.q = cfg.get_double("model.q", 1.0);
    prob.params.validate();

    prob.sp = superpotential_from(cfg);

    prob.f_vec = assemble_forcing(prob.space, cfg.get_string("forcing.kind", "constant"),
                                  cfg.get_double("forcing.fx", 0.0),
                                  cfg.get_double("forcing.fy", 0.0),
                                  cfg.get_double("forcing.scale", 1.0));

    prob.opts.tol = cfg.get_double("solver.tol", 1e-8);
    prob.opts.kmax = cfg.get_int("solver.kmax", 200);
    prob.opts.inner_tol = cfg.get_double("solver.inner_tol", -1.0);
    prob.opts.inner_max_iter = cfg.get_int("solver.inner_max_iter", 200000);
    prob.opts.force = cfg.get_bool("solver.force", false);
    prob.opts.cb_samples = cfg.get_int("solver.cb_samples", 50);
    prob.opts.seed = static_cast<std::uint64_t>(cfg.get_int("solver.seed", 1));
    prob.opts.C_gn = cfg.get_double("constants.C", 1.0);
    prob.homotopy_steps = cfg.get_int("homotopy.steps", 16);
    return prob;
}

int cmd_mesh_info(const std::string& config_path) {
    const Config cfg = Config::parse_file(config_path);
    const Problem prob = build_problem(cfg);
    cfg.check_consumed();
    const Mesh& mesh = prob.space.mesh;
    std::cout << "mesh-info: vertices=" << mesh.vertices.size()
              << " triangles=" << mesh.triangles.size() << " area=" << mesh.area()
              << " boundary=" << mesh.boundary_length()
              << " order=" << prob.space.order << " full_dim=" << prob.space.full_dim
              << " reduced_dim=" << prob.space.reduced_dim << "\n";
    return 0;
}

int cmd_constants(const std::string& config_path, const std::string& out_dir) {
    const Config cfg = Config::parse_file(config_path);
    const Problem prob = build_problem(cfg);
    cfg.check_consumed();
    ensure_dir(out_dir);
    const ConstantsReport c = constants_for(prob);
    write_constants_csv(join(out_dir, "constants.csv"), c);
    std::cout << "constants: regime=" << regime_name(c.regime)
              << " sigma_f=" << c.sigma_f << " rho_f=" << c.rho_f << " ("
              << c.condition << ")\n";
    return c.regime == Regime::infeasible ? 2 : 0;
}

int cmd_solve(const std::string& config_path, const std::string& out_dir) {
    const Config cfg = Config::parse_file(config_path);
    const Problem prob = build_problem(cfg);
    cfg.check_consumed();
    ensure_dir(out_dir);
    try {
        const SolveResult res = picard_solve(prob.space, prob.forms, prob.params,
                                             prob.sp, prob.f_vec, prob.opts);
        write_iterates_csv(join(out_dir, "iterates.csv"), res.report);
        write_field_csv(join(out_dir, "field.csv"), res.u);
        write_constants_csv(join(out_dir, "constants.csv"), res.report.constants);
        write_convergence_plot(out_dir, res.report);
        const auto& last = res.report.iterates.back();
        std::cout << "solve: converged in " << last.k << " outer iterations, step_V="
                  << last.step_V << " norm_V=" << last.norm_V << "\n";
        return 0;
    } catch (const NotContractive& e) {
        std::cout << "solve: infeasible regime (" << e.what() << ")\n";
        return 2;
    } catch (const MaxIterExceeded& e) {
        std::cout << "solve: solver failure (" << e.what() << ")\n";
        return 3;
    }
}

int cmd_homotopy(const std::string& config_path, const std::string& out_dir) {
    const Config cfg = Config::parse_file(config_path);
    const Problem prob = build_problem(cfg);
    cfg.check_consumed();
    ensure_dir(out_dir);
    try {
        const SolveResult res =
            homotopy_solve(prob.space, prob.forms, prob.params, prob.sp, prob.f_vec,
                           prob.homotopy_steps, prob.opts);
        write_iterates_csv(join(out_dir, "path.csv"), res.report);
        write_field_csv(join(out_dir, "field.csv"), res.u);
        write_constants_csv(join(out_dir, "constants.csv"), res.report.constants);
        const DiscreteEnergy energy = build_energy(prob.space, prob.forms, prob.sp,
                                                   prob.params, prob.f_vec, res.u);
        const double residual = hvi_residual(energy, res.u, 200, prob.opts.seed);
        std::cout << "homotopy: reached t=1 in " << res.report.iterates.size()
                  << " continuation steps, hvi_residual=" << residual << "\n";
        return 0;
    } catch (const NotContractive& e) {
        std::cout << "homotopy: infeasible regime (" << e.what() << ")\n";
        return 2;
    } catch (const MaxIterExceeded& e) {
        std::cout << "homotopy: solver failure (" << e.what() << ")\n";
        return 3;
    } catch (const BoundViolated& e) {
        std::cout << "homotopy: solver failure (" << e.what() << ")\n";
        return 3;
    }
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
    const Config cfg = Config::parse_file(config_path);
    const std::string key = cfg.require_string("sweep.key");
    const double from = cfg.require_double("sweep.from");
    const double to = cfg.require_double("sweep.to");
    const int count = cfg.get_int("sweep.count", 16);
    if (count < 1) throw BadConfig("sweep.count must be >= 1");
    if (key != "model.mu" && key != "model.alpha" && key != "model.beta" &&
        key != "model.kappa" && key != "forcing.scale")
        throw BadConfig("sweep.key: unsupported key `" + key + "`");

    Problem prob = build_problem(cfg);
    cfg.check_consumed();
    ensure_dir(out_dir);

    // Space-level constants are sweep-invariant; compute them once.
    const double lambda0 = principal_eigenvalue(prob.space, prob.forms);
    const double Cb =
        estimate_Cb(prob.space, prob.forms, prob.opts.cb_samples, prob.opts.seed);
    const double gamma_len = prob.space.mesh.boundary_length();
    const double area = prob.space.mesh.area();
    const double f_norm0 = dual_norm(prob.forms, prob.f_vec);

    std::vector<ConstantsReport> rows(static_cast<std::size_t>(count));
    std::vector<double> values(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto work = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            const double v =
                count == 1 ? from : from + (to - from) * i / (count - 1.0);
            ModelParams p = prob.params;
            double f_norm = f_norm0;
            if (key == "model.mu") p.mu = v;
            else if (key == "model.alpha") p.alpha = v;
            else if (key == "model.beta") p.beta = v;
            else if (key == "model.kappa") p.kappa = v;
            else f_norm = f_norm0 * std::abs(v);
            values[static_cast<std::size_t>(i)] = v;
            rows[static_cast<std::size_t>(i)] =
                regime_check(p, lambda0, prob.sp.m, prob.sp.c0, gamma_len, area, Cb,
                             f_norm, prob.opts.C_gn);
        }
    };
    const int n_threads = std::min(worker_thread_cap(), count);
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    {
        std::ofstream out(join(out_dir, "sweep.csv"), std::ios::binary);
        out << "value,regime,sigma_f,rho_f,upsilon_f,mu_eff,varrho_r\n";
        for (int i = 0; i < count; ++i) {
            const auto& c = rows[static_cast<std::size_t>(i)];
            out << fmt(values[static_cast<std::size_t>(i)]) << ','
                << regime_name(c.regime) << ',' << fmt(c.sigma_f) << ','
                << fmt(c.rho_f) << ',' << fmt(c.upsilon_f) << ',' << fmt(c.mu_eff)
                << ',' << fmt(c.varrho_r) << '\n';
        }
    }
    {
        std::ofstream dat(join(out_dir, "regime_map.dat"), std::ios::binary);
        dat << "# value regime_code sigma_f\n";
        for (int i = 0; i < count; ++i) {
            const auto& c = rows[static_cast<std::size_t>(i)];
            const int code = c.regime == Regime::contraction_small_data ? 0
                             : c.regime == Regime::global_supercritical ? 1
                                                                        : 2;
            dat << fmt(values[static_cast<std::size_t>(i)]) << ' ' << code << ' '
                << fmt(c.sigma_f) << '\n';
        }
        std::ofstream gp(join(out_dir, "regime_map.gp"), std::ios::binary);
        gp << "set xlabel '" << key << "'\n"
           << "set ylabel 'regime (0=contraction, 1=global, 2=infeasible)'\n"
           << "plot 'regime_map.dat' using 1:2 with points pt 7 title 'regime'\n";
    }
    std::cout << "sweep: " << count << " points over " << key << " in [" << from
              << ", " << to << "]\n";
    return 0;
}

int cmd_verify(std::uint64_t seed, int n_samples, const std::string& out_dir) {
    ensure_dir(out_dir);
    const auto report = inequality_suite(seed, n_samples);
    write_inequality_report_csv(join(out_dir, "inequalities.csv"), report);
    bool all_pass = true;
    for (const auto& e : report) {
        std::cout << e.name << "," << fmt(e.worst_violation) << ","
                  << (e.pass ? "pass" : "FAIL") << "\n";
        all_pass = all_pass && e.pass;
    }
    std::cout << "verify: " << (all_pass ? "all inequalities pass" : "VIOLATIONS found")
              << " (seed=" << seed << ", samples=" << n_samples << ")\n";
    return all_pass ? 0 : 1;
}

} // namespace cbfed

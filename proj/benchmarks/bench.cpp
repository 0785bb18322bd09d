#include <benchmark/benchmark.h>

#include <random>

#include "cbfed/forms.hpp"
#include "cbfed/inner_solver.hpp"
#include "cbfed/mesh.hpp"
#include "cbfed/space.hpp"

namespace {

const cbfed::ReducedSpace& space8() {
    static const cbfed::ReducedSpace space =
        cbfed::build_reduced_space(cbfed::generate_unit_square_mesh(8, 8), 1);
    return space;
}

const cbfed::AssembledForms& forms8() {
    static const cbfed::AssembledForms forms = cbfed::assemble_forms(space8());
    return forms;
}

Eigen::VectorXd random_field(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
    return v;
}

void bm_build_space(benchmark::State& state) {
    const cbfed::Mesh mesh = cbfed::generate_unit_square_mesh(
        static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(cbfed::build_reduced_space(mesh, 1));
}
BENCHMARK(bm_build_space)->Arg(4)->Arg(8);

void bm_assemble_forms(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(cbfed::assemble_forms(space8()));
}
BENCHMARK(bm_assemble_forms);

void bm_eval_b(benchmark::State& state) {
    const auto& forms = forms8();
    const int m = space8().reduced_dim;
    const Eigen::VectorXd u = random_field(m, 1), v = random_field(m, 2),
                          w = random_field(m, 3);
    for (auto _ : state) benchmark::DoNotOptimize(cbfed::eval_b(forms, u, v, w));
}
BENCHMARK(bm_eval_b);

void bm_eval_power(benchmark::State& state) {
    const auto& forms = forms8();
    const int m = space8().reduced_dim;
    const Eigen::VectorXd u = random_field(m, 1), v = random_field(m, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(cbfed::eval_power(forms, u, v, 3.0));
}
BENCHMARK(bm_eval_power);

void bm_prox_1d(benchmark::State& state) {
    const cbfed::Superpotential sp = cbfed::Superpotential::cos_nonconvex(2.0);
    double target = -3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cbfed::prox_1d(sp, 0.25, target, 0.1));
        target += 1e-6;
    }
}
BENCHMARK(bm_prox_1d);

void bm_inner_solve(benchmark::State& state) {
    const auto& space = space8();
    const auto& forms = forms8();
    cbfed::ModelParams params;
    params.alpha = 5.0;
    const cbfed::Superpotential sp = cbfed::Superpotential::quadratic(1.0);
    const Eigen::VectorXd f = 0.1 * random_field(space.reduced_dim, 4);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(space.reduced_dim);
    const cbfed::DiscreteEnergy energy =
        cbfed::build_energy(space, forms, sp, params, f, zero);
    for (auto _ : state)
        benchmark::DoNotOptimize(cbfed::minimize_energy(energy, zero, 1e-8, 100000));
}
BENCHMARK(bm_inner_solve);

} // namespace

BENCHMARK_MAIN();

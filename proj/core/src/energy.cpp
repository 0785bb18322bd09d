#include "cbfed/energy.hpp"

#include "cbfed/errors.hpp"

namespace cbfed {

double DiscreteEnergy::value(const Eigen::VectorXd& v) const {
    if (v.size() != forms->K.rows())
        throw DimensionMismatch("DiscreteEnergy::value: coefficient length mismatch");
    double E = 0.5 * params.mu * v.dot(forms->K * v) +
               0.5 * params.alpha * v.dot(forms->M * v) - load.dot(v);
    E += params.beta / (params.r + 1.0) * eval_power(*forms, v, v, params.r);
    if (params.kappa != 0.0)
        E += params.kappa / (params.q + 1.0) * eval_power(*forms, v, v, params.q);
    E += discrete_J(*space, sp, v);
    return E;
}

Eigen::VectorXd DiscreteEnergy::smooth_grad(const Eigen::VectorXd& v) const {
    if (v.size() != forms->K.rows())
        throw DimensionMismatch("DiscreteEnergy::smooth_grad: length mismatch");
    Eigen::VectorXd g = params.mu * (forms->K * v) + params.alpha * (forms->M * v) -
                        load + params.beta * power_load(*forms, v, params.r);
    if (params.kappa != 0.0) g += params.kappa * power_load(*forms, v, params.q);
    return g;
}

DiscreteEnergy build_energy(const ReducedSpace& space, const AssembledForms& forms,
                            const Superpotential& sp, const ModelParams& params,
                            const Eigen::VectorXd& f_vec, const Eigen::VectorXd& w) {
    params.validate();
    if (f_vec.size() != forms.K.rows() || w.size() != forms.K.rows())
        throw DimensionMismatch("build_energy: load/field length mismatch");
    DiscreteEnergy energy;
    energy.space = &space;
    energy.forms = &forms;
    energy.params = params;
    energy.sp = sp;
    energy.frozen_w = w;
    energy.load = f_vec - convection_load(forms, w);
    return energy;
}

} // namespace cbfed

#include "flair/adam.hpp"

#include <cmath>

#include "flair/errors.hpp"

namespace flair {

AdamState AdamState::create(const std::vector<Matrix*>& params, double lr) {
    AdamState s;
    s.lr = lr;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Matrix* p : params) {
        s.m.emplace_back(p->rows, p->cols);
        s.v.emplace_back(p->rows, p->cols);
    }
    return s;
}

void adam_step(AdamState& state, const std::vector<Matrix*>& params,
               const std::vector<Matrix>& grads) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw dimension_error("adam_step: parameter/gradient/state count mismatch");
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (size_t p = 0; p < params.size(); ++p) {
        Matrix& theta = *params[p];
        const Matrix& g = grads[p];
        if (!theta.same_shape(g))
            throw dimension_error("adam_step: param " + theta.shape_str() + " vs grad " +
                                  g.shape_str());
        Matrix& m = state.m[p];
        Matrix& v = state.v[p];
        for (size_t i = 0; i < g.size(); ++i) {
            const double gi = g.data[i];
            if (!std::isfinite(gi))
                throw divergence_error("non-finite gradient in adam_step", state.step_count);
            m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * gi;
            v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * gi * gi;
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            theta.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace flair

#pragma once

#include <vector>

#include "flair/matrix.hpp"

namespace flair {

// Bias-corrected Adam over a fixed parameter list. Moment shapes mirror the
// parameters; step_count increases by exactly one per update.
struct AdamState {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;
    std::vector<Matrix> m;
    std::vector<Matrix> v;

    static AdamState create(const std::vector<Matrix*>& params, double lr = 5e-4);
};

// In-place update of `params` from `grads`. Throws divergence_error (carrying
// the step index) on any non-finite gradient entry.
void adam_step(AdamState& state, const std::vector<Matrix*>& params,
               const std::vector<Matrix>& grads);

}  // namespace flair

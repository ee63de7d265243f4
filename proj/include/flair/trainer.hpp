#pragma once

#include <vector>

#include "flair/adam.hpp"
#include "flair/network.hpp"
#include "flair/rng.hpp"
#include "flair/tape.hpp"

namespace flair {

// Training tape for one InrModel: affine + activation chain ending in an MSE
// node. Learnable activation scalars (RC-GAUSS T/sigma/zeta) become 1x1
// parameter nodes; beta never does.
struct TapeNet {
    Tape tape;
    int input = -1;
    int output = -1;
    int loss = -1;
    std::vector<int> weight_nodes;
    std::vector<int> bias_nodes;
    struct ActNodes {
        int t = -1, sigma = -1, zeta = -1;
    };
    std::vector<ActNodes> act_nodes;  // per hidden layer; -1 when frozen
    std::vector<int> trainable_ids;   // adam ordering
};

TapeNet build_training_tape(const InrModel& model, int batch_rows);

// Copies tape parameter values back into the model (weights, biases and
// learned activation scalars).
void write_back(const TapeNet& net, InrModel& model);

struct TrainLoopOptions {
    long iterations = 2000;
    double lr = 5e-4;
    int batch_size = 0;  // 0 = full batch
    uint64_t batch_seed = 1;
};

struct TrainResult {
    std::vector<double> loss_curve;
    bool diverged = false;
    long iterations_run = 0;
};

// Full-batch (or shuffled minibatch) Adam minimization of the MSE between
// the network output over `lifted_inputs` and `targets`. The model is
// updated in place; on divergence the loop stops and the partial curve is
// returned.
TrainResult train_inr(InrModel& model, const Matrix& lifted_inputs, const Matrix& targets,
                      const TrainLoopOptions& opts);

}  // namespace flair

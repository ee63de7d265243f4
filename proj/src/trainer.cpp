#include "flair/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flair/errors.hpp"

namespace flair {

TapeNet build_training_tape(const InrModel& model, int batch_rows) {
    TapeNet net;
    Tape& t = net.tape;
    net.input = t.add_input(batch_rows, model.lifted_dim(), "coords");

    int z = net.input;
    for (size_t l = 0; l < model.layers.size(); ++l) {
        const InrModel::Layer& layer = model.layers[l];
        const std::string tag = std::to_string(l);
        const int w = t.add_param(layer.W, "W" + tag);
        const int b = t.add_param(layer.b, "b" + tag);
        net.weight_nodes.push_back(w);
        net.bias_nodes.push_back(b);
        net.trainable_ids.push_back(w);
        net.trainable_ids.push_back(b);
        z = t.bias_add(t.matmul(z, w), b);
        if (!layer.has_activation) continue;
        TapeNet::ActNodes an;
        if (layer.act.learnable) {
            an.t = t.add_param(Matrix::scalar(layer.act.T), "T" + tag);
            an.sigma = t.add_param(Matrix::scalar(layer.act.sigma), "sigma" + tag);
            an.zeta = t.add_param(Matrix::scalar(layer.act.zeta), "zeta" + tag);
            net.trainable_ids.push_back(an.t);
            net.trainable_ids.push_back(an.sigma);
            net.trainable_ids.push_back(an.zeta);
        }
        net.act_nodes.push_back(an);
        z = t.activation(z, layer.act, an.t, an.sigma, an.zeta);
    }
    net.output = z;
    net.loss = t.mse(z, Matrix(batch_rows, model.output_dim));
    return net;
}

void write_back(const TapeNet& net, InrModel& model) {
    for (size_t l = 0; l < model.layers.size(); ++l) {
        model.layers[l].W = net.tape.value(net.weight_nodes[l]);
        model.layers[l].b = net.tape.value(net.bias_nodes[l]);
    }
    for (size_t l = 0; l < net.act_nodes.size(); ++l) {
        const TapeNet::ActNodes& an = net.act_nodes[l];
        if (an.t < 0) continue;
        model.layers[l].act.T = net.tape.value(an.t).data[0];
        model.layers[l].act.sigma = net.tape.value(an.sigma).data[0];
        model.layers[l].act.zeta = net.tape.value(an.zeta).data[0];
    }
}

namespace {

Matrix take_rows(const Matrix& m, const std::vector<int>& idx, int lo, int n) {
    Matrix out(n, m.cols);
    for (int r = 0; r < n; ++r) {
        const int src = idx[lo + r];
        std::copy_n(m.data.begin() + static_cast<size_t>(src) * m.cols, m.cols,
                    out.data.begin() + static_cast<size_t>(r) * m.cols);
    }
    return out;
}

constexpr double kScalarFloor = 1e-3;  // keeps T and sigma positive

}  // namespace

TrainResult train_inr(InrModel& model, const Matrix& lifted_inputs, const Matrix& targets,
                      const TrainLoopOptions& opts) {
    if (lifted_inputs.rows != targets.rows)
        throw dimension_error("train_inr: " + lifted_inputs.shape_str() + " inputs vs " +
                              targets.shape_str() + " targets");
    const int total = lifted_inputs.rows;
    const int batch = opts.batch_size > 0 ? std::min(opts.batch_size, total) : total;
    const bool full_batch = batch == total;

    TapeNet net = build_training_tape(model, batch);
    std::vector<Matrix*> params;
    params.reserve(net.trainable_ids.size());
    for (int id : net.trainable_ids) params.push_back(&net.tape.param_value(id));
    AdamState adam = AdamState::create(params, opts.lr);

    if (full_batch) {
        net.tape.set_input(net.input, lifted_inputs);
        net.tape.set_target(net.loss, targets);
    }

    Rng batch_rng(opts.batch_seed);
    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);
    int cursor = total;  // force initial shuffle

    TrainResult res;
    res.loss_curve.reserve(opts.iterations);
    for (long iter = 0; iter < opts.iterations; ++iter) {
        if (!full_batch) {
            if (cursor + batch > total) {
                batch_rng.shuffle(order);
                cursor = 0;
            }
            net.tape.set_input(net.input, take_rows(lifted_inputs, order, cursor, batch));
            net.tape.set_target(net.loss, take_rows(targets, order, cursor, batch));
            cursor += batch;
        }
        const double loss = net.tape.forward(net.loss).data[0];
        res.loss_curve.push_back(loss);
        res.iterations_run = iter + 1;
        if (!std::isfinite(loss)) {
            res.diverged = true;
            break;
        }
        try {
            adam_step(adam, params, backward(net.tape, net.loss));
        } catch (const divergence_error&) {
            res.diverged = true;
            break;
        }
        for (const TapeNet::ActNodes& an : net.act_nodes) {
            if (an.t < 0) continue;
            double& T = net.tape.param_value(an.t).data[0];
            double& sigma = net.tape.param_value(an.sigma).data[0];
            T = std::max(T, kScalarFloor);
            sigma = std::max(sigma, kScalarFloor);
        }
    }

    write_back(net, model);
    return res;
}

}  // namespace flair

#include "flair/tape.hpp"

#include <cmath>

#include "flair/errors.hpp"

namespace flair {

namespace {
std::string node_label(int id, const TapeNode& n) {
    return "node " + std::to_string(id) + (n.name.empty() ? "" : " (" + n.name + ")");
}
}  // namespace

int Tape::push(TapeNode n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_id(int id, const char* what) const {
    if (id < 0 || id >= static_cast<int>(nodes_.size()))
        throw contract_error(std::string(what) + ": bad node id " + std::to_string(id));
}

int Tape::add_input(int rows, int cols, std::string name) {
    TapeNode n;
    n.kind = OpKind::Input;
    n.value = Matrix(rows, cols);
    n.name = std::move(name);
    const int id = push(std::move(n));
    input_ids_.push_back(id);
    return id;
}

int Tape::add_param(Matrix init, std::string name) {
    TapeNode n;
    n.kind = OpKind::Param;
    n.value = std::move(init);
    n.name = std::move(name);
    const int id = push(std::move(n));
    param_ids_.push_back(id);
    return id;
}

int Tape::matmul(int a, int b) {
    check_id(a, "matmul");
    check_id(b, "matmul");
    TapeNode n;
    n.kind = OpKind::MatMul;
    n.a = a;
    n.b = b;
    return push(std::move(n));
}

int Tape::bias_add(int a, int bias) {
    check_id(a, "bias_add");
    check_id(bias, "bias_add");
    TapeNode n;
    n.kind = OpKind::BiasAdd;
    n.a = a;
    n.b = bias;
    return push(std::move(n));
}

int Tape::activation(int x, const ActivationSpec& spec, int t_param, int sigma_param,
                     int zeta_param) {
    check_id(x, "activation");
    TapeNode n;
    n.kind = OpKind::Act;
    n.a = x;
    n.act = spec;
    n.t_param = t_param;
    n.sigma_param = sigma_param;
    n.zeta_param = zeta_param;
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    check_id(a, "add");
    check_id(b, "add");
    TapeNode n;
    n.kind = OpKind::Add;
    n.a = a;
    n.b = b;
    return push(std::move(n));
}

int Tape::sub(int a, int b) {
    check_id(a, "sub");
    check_id(b, "sub");
    TapeNode n;
    n.kind = OpKind::Sub;
    n.a = a;
    n.b = b;
    return push(std::move(n));
}

int Tape::scale(int a, double alpha) {
    check_id(a, "scale");
    TapeNode n;
    n.kind = OpKind::Scale;
    n.a = a;
    n.alpha = alpha;
    return push(std::move(n));
}

int Tape::square(int a) {
    check_id(a, "square");
    TapeNode n;
    n.kind = OpKind::Square;
    n.a = a;
    return push(std::move(n));
}

int Tape::mse(int pred, Matrix target) {
    check_id(pred, "mse");
    TapeNode n;
    n.kind = OpKind::Mse;
    n.a = pred;
    n.target = std::move(target);
    return push(std::move(n));
}

void Tape::set_input(int id, Matrix v) {
    check_id(id, "set_input");
    TapeNode& n = nodes_[id];
    if (n.kind != OpKind::Input) throw contract_error("set_input: " + node_label(id, n));
    if (!n.value.same_shape(v))
        throw dimension_error("set_input: " + node_label(id, n) + " expects " +
                              n.value.shape_str() + ", got " + v.shape_str());
    n.value = std::move(v);
}

void Tape::set_target(int mse_id, Matrix target) {
    check_id(mse_id, "set_target");
    TapeNode& n = nodes_[mse_id];
    if (n.kind != OpKind::Mse) throw contract_error("set_target: " + node_label(mse_id, n));
    n.target = std::move(target);
}

Matrix& Tape::param_value(int id) {
    check_id(id, "param_value");
    if (nodes_[id].kind != OpKind::Param)
        throw contract_error("param_value: " + node_label(id, nodes_[id]));
    return nodes_[id].value;
}

void Tape::eval(int id) {
    TapeNode& n = nodes_[id];
    switch (n.kind) {
        case OpKind::Input:
        case OpKind::Param:
            return;
        case OpKind::MatMul: {
            const Matrix& a = nodes_[n.a].value;
            const Matrix& b = nodes_[n.b].value;
            if (a.cols != b.rows)
                throw dimension_error("matmul at " + node_label(id, n) + ": " + a.shape_str() +
                                      " * " + b.shape_str());
            flair::matmul_into(a, b, n.value);
            return;
        }
        case OpKind::BiasAdd: {
            const Matrix& a = nodes_[n.a].value;
            const Matrix& bias = nodes_[n.b].value;
            if (bias.rows != 1 || bias.cols != a.cols)
                throw dimension_error("bias_add at " + node_label(id, n) + ": " + a.shape_str() +
                                      " + " + bias.shape_str());
            ensure_shape(n.value, a.rows, a.cols);
            for (int r = 0; r < a.rows; ++r)
                for (int c = 0; c < a.cols; ++c)
                    n.value.at(r, c) = a.at(r, c) + bias.data[c];
            return;
        }
        case OpKind::Act: {
            const Matrix& x = nodes_[n.a].value;
            ActivationSpec spec = n.act;
            if (n.t_param >= 0) spec.T = nodes_[n.t_param].value.data[0];
            if (n.sigma_param >= 0) spec.sigma = nodes_[n.sigma_param].value.data[0];
            if (n.zeta_param >= 0) spec.zeta = nodes_[n.zeta_param].value.data[0];
            const bool param_grads = n.t_param >= 0;
            ensure_shape(n.value, x.rows, x.cols);
            ensure_shape(n.grad_x, x.rows, x.cols);
            if (param_grads) {
                ensure_shape(n.grad_T, x.rows, x.cols);
                ensure_shape(n.grad_sigma, x.rows, x.cols);
                ensure_shape(n.grad_zeta, x.rows, x.cols);
            }
            for (size_t i = 0; i < x.size(); ++i) {
                const ActivationEval ev = activation_eval(x.data[i], spec, param_grads);
                n.value.data[i] = ev.value;
                n.grad_x.data[i] = ev.d_x;
                if (param_grads) {
                    n.grad_T.data[i] = ev.d_T;
                    n.grad_sigma.data[i] = ev.d_sigma;
                    n.grad_zeta.data[i] = ev.d_zeta;
                }
            }
            return;
        }
        case OpKind::Add:
        case OpKind::Sub: {
            const Matrix& a = nodes_[n.a].value;
            const Matrix& b = nodes_[n.b].value;
            if (!a.same_shape(b))
                throw dimension_error("add/sub at " + node_label(id, n) + ": " + a.shape_str() +
                                      " vs " + b.shape_str());
            n.value = a;
            const double sgn = n.kind == OpKind::Add ? 1.0 : -1.0;
            for (size_t i = 0; i < b.size(); ++i) n.value.data[i] += sgn * b.data[i];
            return;
        }
        case OpKind::Scale: {
            n.value = nodes_[n.a].value;
            for (double& v : n.value.data) v *= n.alpha;
            return;
        }
        case OpKind::Square: {
            const Matrix& a = nodes_[n.a].value;
            n.value = Matrix(a.rows, a.cols);
            for (size_t i = 0; i < a.size(); ++i) n.value.data[i] = a.data[i] * a.data[i];
            return;
        }
        case OpKind::Mse: {
            const Matrix& p = nodes_[n.a].value;
            if (!p.same_shape(n.target))
                throw dimension_error("mse at " + node_label(id, n) + ": " + p.shape_str() +
                                      " vs target " + n.target.shape_str());
            if (p.rows == 0) throw contract_error("mse at " + node_label(id, n) + ": empty batch");
            double acc = 0.0;
            for (size_t i = 0; i < p.size(); ++i) {
                const double d = p.data[i] - n.target.data[i];
                acc += d * d;
            }
            n.value = Matrix::scalar(acc / p.rows);
            return;
        }
    }
}

const Matrix& Tape::forward(int out) {
    check_id(out, "forward");
    for (int id = 0; id <= out; ++id) eval(id);
    return nodes_[out].value;
}

void Tape::accumulate(int id, const Matrix& g) {
    Matrix& a = adjoints_[id];
    if (a.rows == 0) {
        a = g;
        return;
    }
    for (size_t i = 0; i < g.size(); ++i) a.data[i] += g.data[i];
}

const Matrix& Tape::adjoint(int id) const {
    check_id(id, "adjoint");
    return adjoints_[id];
}

void Tape::backward(int loss) {
    check_id(loss, "backward");
    const Matrix& l = nodes_[loss].value;
    if (l.rows != 1 || l.cols != 1)
        throw contract_error("backward: loss " + node_label(loss, nodes_[loss]) +
                             " is not scalar (" + l.shape_str() + ")");
    adjoints_.assign(nodes_.size(), Matrix());
    adjoints_[loss] = Matrix::scalar(1.0);

    for (int id = loss; id >= 0; --id) {
        const TapeNode& n = nodes_[id];
        const Matrix& dy = adjoints_[id];
        if (dy.rows == 0) continue;  // node does not feed the loss
        switch (n.kind) {
            case OpKind::Input:
            case OpKind::Param:
                break;
            case OpKind::MatMul:
                accumulate(n.a, matmul_nt(dy, nodes_[n.b].value));
                accumulate(n.b, matmul_tn(nodes_[n.a].value, dy));
                break;
            case OpKind::BiasAdd: {
                accumulate(n.a, dy);
                Matrix db(1, dy.cols);
                for (int r = 0; r < dy.rows; ++r)
                    for (int c = 0; c < dy.cols; ++c) db.data[c] += dy.at(r, c);
                accumulate(n.b, db);
                break;
            }
            case OpKind::Act: {
                const Matrix& x = nodes_[n.a].value;
                Matrix dx(x.rows, x.cols);
                for (size_t i = 0; i < x.size(); ++i)
                    dx.data[i] = dy.data[i] * n.grad_x.data[i];
                accumulate(n.a, dx);
                if (n.t_param >= 0) {
                    double dT = 0.0, dsigma = 0.0, dzeta = 0.0;
                    for (size_t i = 0; i < x.size(); ++i) {
                        dT += dy.data[i] * n.grad_T.data[i];
                        dsigma += dy.data[i] * n.grad_sigma.data[i];
                        dzeta += dy.data[i] * n.grad_zeta.data[i];
                    }
                    accumulate(n.t_param, Matrix::scalar(dT));
                    accumulate(n.sigma_param, Matrix::scalar(dsigma));
                    accumulate(n.zeta_param, Matrix::scalar(dzeta));
                }
                break;
            }
            case OpKind::Add:
                accumulate(n.a, dy);
                accumulate(n.b, dy);
                break;
            case OpKind::Sub: {
                accumulate(n.a, dy);
                Matrix neg = dy;
                for (double& v : neg.data) v = -v;
                accumulate(n.b, neg);
                break;
            }
            case OpKind::Scale: {
                Matrix g = dy;
                for (double& v : g.data) v *= n.alpha;
                accumulate(n.a, g);
                break;
            }
            case OpKind::Square: {
                const Matrix& x = nodes_[n.a].value;
                Matrix g(x.rows, x.cols);
                for (size_t i = 0; i < x.size(); ++i) g.data[i] = 2.0 * x.data[i] * dy.data[i];
                accumulate(n.a, g);
                break;
            }
            case OpKind::Mse: {
                const Matrix& p = nodes_[n.a].value;
                Matrix g(p.rows, p.cols);
                const double scale = 2.0 * dy.data[0] / p.rows;
                for (size_t i = 0; i < p.size(); ++i)
                    g.data[i] = scale * (p.data[i] - n.target.data[i]);
                accumulate(n.a, g);
                break;
            }
        }
    }
}

Matrix forward(Tape& tape, const std::vector<Matrix>& inputs) {
    const auto& ids = tape.input_ids();
    if (inputs.size() != ids.size())
        throw dimension_error("forward: tape declares " + std::to_string(ids.size()) +
                              " inputs, got " + std::to_string(inputs.size()));
    for (size_t i = 0; i < inputs.size(); ++i) tape.set_input(ids[i], inputs[i]);
    return tape.forward(tape.node_count() - 1);
}

std::vector<Matrix> backward(Tape& tape, int loss) {
    tape.backward(loss);
    std::vector<Matrix> grads;
    grads.reserve(tape.param_ids().size());
    for (int id : tape.param_ids()) {
        const Matrix& a = tape.adjoint(id);
        grads.push_back(a.rows == 0 ? Matrix(tape.value(id).rows, tape.value(id).cols) : a);
    }
    return grads;
}

}  // namespace flair

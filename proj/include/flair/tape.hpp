#pragma once

#include <string>
#include <vector>

#include "flair/activation.hpp"
#include "flair/matrix.hpp"

namespace flair {

enum class OpKind { Input, Param, MatMul, BiasAdd, Act, Add, Sub, Scale, Square, Mse };

struct TapeNode {
    OpKind kind = OpKind::Input;
    int a = -1;
    int b = -1;
    // Act only: optional 1x1 parameter nodes feeding T / sigma / zeta.
    int t_param = -1;
    int sigma_param = -1;
    int zeta_param = -1;
    ActivationSpec act;
    double alpha = 1.0;  // Scale only
    Matrix target;       // Mse only
    Matrix value;
    // Act only: partials cached by forward so backward is multiply-add.
    Matrix grad_x, grad_T, grad_sigma, grad_zeta;
    std::string name;
};

// Fixed-topology record of matrix ops. Node ids are topologically ordered by
// construction; forward caches every intermediate value, backward walks the
// ids once in reverse. One tape is owned by one trainer; forward-only reads
// of a frozen parameter set belong in InrModel::predict instead.
class Tape {
public:
    int add_input(int rows, int cols, std::string name = "input");
    int add_param(Matrix init, std::string name = "param");
    int matmul(int a, int b);
    int bias_add(int a, int bias);
    int activation(int x, const ActivationSpec& spec, int t_param = -1, int sigma_param = -1,
                   int zeta_param = -1);
    int add(int a, int b);
    int sub(int a, int b);
    int scale(int a, double alpha);
    int square(int a);
    int mse(int pred, Matrix target);

    void set_input(int id, Matrix v);
    void set_target(int mse_id, Matrix target);

    // Evaluates nodes 0..out and returns the value of `out`.
    const Matrix& forward(int out);
    // Seeds the scalar loss node with 1 and accumulates adjoints; requires a
    // preceding forward over at least `loss`.
    void backward(int loss);

    const Matrix& value(int id) const { return nodes_[id].value; }
    const Matrix& adjoint(int id) const;
    Matrix& param_value(int id);

    const std::vector<int>& param_ids() const { return param_ids_; }
    const std::vector<int>& input_ids() const { return input_ids_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const TapeNode& node(int id) const { return nodes_[id]; }

private:
    int push(TapeNode n);
    void eval(int id);
    void accumulate(int id, const Matrix& g);
    void check_id(int id, const char* what) const;

    std::vector<TapeNode> nodes_;
    std::vector<Matrix> adjoints_;
    std::vector<int> param_ids_;
    std::vector<int> input_ids_;
};

// Binds `inputs` to the tape's input nodes in declaration order, then
// evaluates through the final node.
Matrix forward(Tape& tape, const std::vector<Matrix>& inputs);

// Runs the backward pass from a scalar loss node and returns the gradient of
// every parameter node, aligned with tape.param_ids().
std::vector<Matrix> backward(Tape& tape, int loss);

}  // namespace flair

#include <cmath>

#include "doctest.h"
#include "flair/adam.hpp"
#include "flair/errors.hpp"
#include "flair/tape.hpp"
#include "flair/trainer.hpp"
#include "testutil.hpp"

using namespace flair;

TEST_SUITE("tensorgraph") {

TEST_CASE("matmul against the reference kernel") {
    Rng rng(3);
    const Matrix a = testutil::random_matrix(7, 5, rng);
    const Matrix b = testutil::random_matrix(5, 9, rng);
    const Matrix fast = matmul(a, b);
    const Matrix ref = matmul_reference(a, b);
    for (size_t i = 0; i < fast.size(); ++i) CHECK(fast.data[i] == doctest::Approx(ref.data[i]).epsilon(1e-12));
    CHECK_THROWS_AS(matmul(a, a), dimension_error);
}

TEST_CASE("forward: identity matmul") {
    Tape t;
    const int x = t.add_input(2, 2);
    Matrix eye(2, 2);
    eye.at(0, 0) = eye.at(1, 1) = 1.0;
    const int w = t.add_param(eye);
    t.matmul(x, w);
    Matrix in(2, 2);
    in.data = {1, 2, 3, 4};
    const Matrix out = forward(t, {in});
    for (int i = 0; i < 4; ++i) CHECK(out.data[i] == in.data[i]);
}

TEST_CASE("forward: zero weights pass the bias through") {
    Tape t;
    const int x = t.add_input(3, 1);
    const int w = t.add_param(Matrix(1, 1));
    const int b = t.add_param(Matrix::scalar(0.5));
    t.bias_add(t.matmul(x, w), b);
    Matrix in(3, 1);
    in.data = {-2.0, 0.0, 7.0};
    const Matrix out = forward(t, {in});
    for (double v : out.data) CHECK(v == 0.5);
}

TEST_CASE("forward: matmul, bias-add, sin chain at x = 0") {
    // Hand evaluation: x*W = 0, plus bias, then elementwise sin -> sin(b).
    Tape t;
    const int x = t.add_input(1, 2);
    Rng rng(11);
    const int w = t.add_param(testutil::random_matrix(2, 3, rng));
    Matrix bias(1, 3);
    bias.data = {0.3, -1.1, 2.0};
    const int b = t.add_param(bias);
    ActivationSpec sine;
    sine.kind = ActivationKind::Sine;
    sine.omega0 = 1.0;
    t.activation(t.bias_add(t.matmul(x, w), b), sine);
    const Matrix out = forward(t, {Matrix(1, 2)});
    for (int c = 0; c < 3; ++c) CHECK(out.data[c] == doctest::Approx(std::sin(bias.data[c])).epsilon(1e-15));
}

TEST_CASE("forward: shape mismatch names the offending node") {
    Tape t;
    const int x = t.add_input(2, 3);
    const int w = t.add_param(Matrix(2, 2), "Wbad");
    t.matmul(x, w);
    try {
        forward(t, {Matrix(2, 3)});
        FAIL("expected dimension_error");
    } catch (const dimension_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("node 2") != std::string::npos);
        CHECK(msg.find("2x3") != std::string::npos);
    }
}

TEST_CASE("backward: d(w^2)/dw at w=3 is 6") {
    Tape t;
    const int w = t.add_param(Matrix::scalar(3.0));
    const int sq = t.square(w);
    t.forward(sq);
    t.backward(sq);
    CHECK(t.adjoint(w).data[0] == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("backward: zero gradient at the MSE minimum") {
    Tape t;
    const int x = t.add_input(4, 1);
    const int w = t.add_param(Matrix::scalar(1.0));
    Matrix target(4, 1);
    target.data = {1, 2, 3, 4};
    const int loss = t.mse(t.matmul(x, w), target);
    Matrix in(4, 1);
    in.data = {1, 2, 3, 4};  // prediction equals target at w = 1
    t.set_input(x, in);
    t.forward(loss);
    CHECK(t.value(loss).data[0] == 0.0);
    const auto grads = backward(t, loss);
    CHECK(grads[0].data[0] == 0.0);
}

TEST_CASE("backward rejects a non-scalar loss") {
    Tape t;
    const int x = t.add_input(2, 2);
    const int w = t.add_param(Matrix(2, 2));
    const int y = t.matmul(x, w);
    t.forward(y);
    CHECK_THROWS_AS(t.backward(y), contract_error);
}

TEST_CASE("gradcheck: random two-layer net vs central differences") {
    Rng rng(17);
    ActivationSpec act = init_activation(TaskFamily::Fitting, 0);
    InrModel model = make_model(2, 1, 2, 8, act, 0, rng);
    TapeNet net = build_training_tape(model, 5);
    const Matrix coords = testutil::random_matrix(5, 2, rng, -2.0, 2.0);
    const Matrix targets = testutil::random_matrix(5, 1, rng, 0.0, 1.0);
    net.tape.set_input(net.input, coords);
    net.tape.set_target(net.loss, targets);
    net.tape.forward(net.loss);
    net.tape.backward(net.loss);

    const double h = 1e-5;
    for (int pid : net.trainable_ids) {
        Matrix& p = net.tape.param_value(pid);
        const Matrix& g = net.tape.adjoint(pid);
        REQUIRE(g.rows == p.rows);
        for (size_t i = 0; i < p.size(); ++i) {
            const double keep = p.data[i];
            p.data[i] = keep + h;
            const double up = net.tape.forward(net.loss).data[0];
            p.data[i] = keep - h;
            const double dn = net.tape.forward(net.loss).data[0];
            p.data[i] = keep;
            const double fd = (up - dn) / (2.0 * h);
            CHECK(testutil::rel_err(g.data[i], fd) < 1e-5);
        }
    }
}

TEST_CASE("backward of a sum of losses equals the sum of adjoints") {
    Rng rng(29);
    Tape t;
    const int x = t.add_input(6, 2);
    const int w = t.add_param(testutil::random_matrix(2, 1, rng));
    const int pred = t.matmul(x, w);
    const Matrix target_a = testutil::random_matrix(6, 1, rng);
    const Matrix target_b = testutil::random_matrix(6, 1, rng);
    const int la = t.mse(pred, target_a);
    const int lb = t.mse(pred, target_b);
    const int lsum = t.add(la, lb);
    const Matrix in = testutil::random_matrix(6, 2, rng);
    t.set_input(x, in);

    t.forward(lsum);
    t.backward(lsum);
    const double g_sum = t.adjoint(w).data[0];
    t.backward(la);
    const double g_a = t.adjoint(w).data[0];
    t.backward(lb);
    const double g_b = t.adjoint(w).data[0];
    CHECK(g_sum == doctest::Approx(g_a + g_b).epsilon(1e-12));
}

TEST_CASE("determinism: identical seeds give bit-identical forwards") {
    auto run = [] {
        Rng rng(5);
        ActivationSpec act = init_activation(TaskFamily::Fitting, 0);
        InrModel model = make_model(2, 3, 2, 16, act, 0, rng);
        Rng crng(99);
        return model.predict(testutil::random_matrix(10, 2, crng));
    };
    const Matrix a = run();
    const Matrix b = run();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a.data[i] == b.data[i]);
}

TEST_CASE("adam: closed-form first step") {
    Matrix theta(1, 1);
    std::vector<Matrix*> params{&theta};
    AdamState st = AdamState::create(params, 5e-4);
    Matrix g = Matrix::scalar(2.0);
    adam_step(st, params, {g});
    // mhat = g, vhat = g^2 on step 1, so the update is lr * g / (|g| + eps).
    const double expected = -5e-4 * 2.0 / (2.0 + 1e-8);
    CHECK(theta.data[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(st.step_count == 1);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
    Matrix theta(2, 2, 0.7);
    std::vector<Matrix*> params{&theta};
    AdamState st = AdamState::create(params);
    for (int i = 0; i < 5; ++i) adam_step(st, params, {Matrix(2, 2)});
    for (double v : theta.data) CHECK(v == 0.7);
    CHECK(st.step_count == 5);
}

TEST_CASE("adam: equal gradients give equal updates") {
    Matrix a = Matrix::scalar(1.0);
    Matrix b = Matrix::scalar(1.0);
    std::vector<Matrix*> params{&a, &b};
    AdamState st = AdamState::create(params);
    for (int i = 0; i < 3; ++i)
        adam_step(st, params, {Matrix::scalar(0.3), Matrix::scalar(0.3)});
    CHECK(a.data[0] == b.data[0]);
}

TEST_CASE("adam: non-finite gradient raises a divergence error with the step") {
    Matrix theta(1, 1);
    std::vector<Matrix*> params{&theta};
    AdamState st = AdamState::create(params);
    adam_step(st, params, {Matrix::scalar(1.0)});
    try {
        adam_step(st, params, {Matrix::scalar(std::nan(""))});
        FAIL("expected divergence_error");
    } catch (const divergence_error& e) {
        CHECK(e.iteration == 2);
    }
}

TEST_CASE("trainer: poisoned input flags divergence with a partial curve") {
    Rng rng(31);
    ActivationSpec act = init_activation(TaskFamily::Fitting, 0);
    InrModel model = make_model(2, 1, 1, 4, act, 0, rng);
    Matrix bad(3, 2);
    bad.data = {1e308, 1e308, 0, 0, 0, 0};
    TrainLoopOptions opts;
    opts.iterations = 10;
    const TrainResult res = train_inr(model, bad, Matrix(3, 1), opts);
    CHECK(res.diverged);
    CHECK(res.iterations_run < 10);
    CHECK(res.loss_curve.size() == static_cast<size_t>(res.iterations_run));
}

TEST_CASE("trainer: only RC-GAUSS registers activation scalars, never beta") {
    Rng rng(7);
    ActivationSpec rc = init_activation(TaskFamily::Fitting, 0);
    InrModel m1 = make_model(2, 1, 3, 4, rc, 0, rng);
    TapeNet n1 = build_training_tape(m1, 2);
    // 4 affine layers (3 hidden + head) * 2 + 3 hidden * 3 scalars.
    CHECK(n1.trainable_ids.size() == 4u * 2u + 3u * 3u);

    ActivationSpec sine;
    sine.kind = ActivationKind::Sine;
    InrModel m2 = make_model(2, 1, 3, 4, sine, 0, rng);
    TapeNet n2 = build_training_tape(m2, 2);
    CHECK(n2.trainable_ids.size() == 4u * 2u);
}

}  // TEST_SUITE

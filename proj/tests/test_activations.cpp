#include <cmath>

#include "doctest.h"
#include "flair/activation.hpp"
#include "flair/errors.hpp"
#include "testutil.hpp"

using namespace flair;

namespace {

// Frozen with an independent high-precision evaluation of the three factors.
constexpr double kRcGaussHalf = 0.616672615701323;   // rc_gauss(0.5; T=1, b=0.05, s=2, z=0)
constexpr double kRcBasisHalf = 0.636247905835068;   // rc_basis(0.5, 1, 0.05)

ActivationSpec rc_spec(double T = 1.0, double sigma = 2.0, double zeta = 0.0) {
    ActivationSpec s;
    s.kind = ActivationKind::RcGauss;
    s.T = T;
    s.sigma = sigma;
    s.zeta = zeta;
    return s;
}

}  // namespace

TEST_SUITE("activations") {

TEST_CASE("rc_basis center, sinc zero, and 1/T scaling") {
    CHECK(rc_basis(0.0, 1.0, 0.05) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(rc_basis(1.0, 1.0, 0.05)) < 1e-10);
    CHECK(rc_basis(0.0, 2.0, 0.05) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rc_basis(0.5, 1.0, 0.05) == doctest::Approx(kRcBasisHalf).epsilon(1e-12));
}

TEST_CASE("rc_basis singular point evaluates by its limit and stays continuous") {
    const double xs = 10.0;  // T/(2*beta) for T=1, beta=0.05
    CHECK(std::fabs(rc_basis(xs, 1.0, 0.05)) < 1e-10);
    CHECK(std::fabs(rc_basis(xs, 1.0, 0.05) - rc_basis(xs + 1e-6, 1.0, 0.05)) < 1e-6);
    CHECK(std::fabs(rc_basis(xs, 1.0, 0.05) - rc_basis(xs - 1e-6, 1.0, 0.05)) < 1e-6);
    CHECK(std::fabs(rc_basis(xs, 1.0, 0.05) - rc_basis(xs + 1e-7, 1.0, 0.05)) < 1e-5);
    CHECK(std::fabs(rc_basis(xs, 1.0, 0.05) - rc_basis(xs - 1e-7, 1.0, 0.05)) < 1e-5);
    // Same at a T where the singular point lands elsewhere.
    const double xs2 = 0.7 / (2.0 * 0.05);
    CHECK(std::fabs(rc_basis(xs2, 0.7, 0.05) - rc_basis(xs2 + 1e-7, 0.7, 0.05)) < 1e-5);
}

TEST_CASE("rc_gauss values at the pinned points") {
    CHECK(rc_gauss(0.0, rc_spec(1.0, 2.0, 0.37)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rc_gauss(0.5, rc_spec()) == doctest::Approx(kRcGaussHalf).epsilon(1e-10));
    // Degenerate envelope: sigma -> inf leaves the bare basis.
    CHECK(rc_gauss(0.5, rc_spec(1.0, 1e12, 0.0)) ==
          doctest::Approx(kRcBasisHalf).epsilon(1e-12));
}

TEST_CASE("rc_gauss is even when zeta = 0") {
    const ActivationSpec s = rc_spec(0.8, 1.5, 0.0);
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(-12.0, 12.0);
        CHECK(rc_gauss(x, s) == doctest::Approx(rc_gauss(-x, s)).epsilon(1e-12));
    }
}

TEST_CASE("rc_gauss magnitude never exceeds 1/T") {
    Rng rng(41);
    for (int i = 0; i < 500; ++i) {
        ActivationSpec s = rc_spec(rng.uniform(0.3, 3.0), rng.uniform(0.5, 4.0),
                                   rng.uniform(-2.0, 2.0));
        const double x = rng.uniform(-25.0, 25.0);
        CHECK(std::fabs(rc_gauss(x, s)) <= 1.0 / s.T + 1e-12);
    }
}

TEST_CASE("baseline values") {
    ActivationSpec s;
    s.omega0 = 30.0;
    s.kind = ActivationKind::Sine;
    CHECK(baseline_activation(0.0, s) == 0.0);
    s.kind = ActivationKind::FinerSine;
    CHECK(baseline_activation(0.0, s) == 0.0);
    s.kind = ActivationKind::Gaussian;
    CHECK(baseline_activation(0.0, s) == 1.0);
    s.kind = ActivationKind::ReluPE;
    CHECK(baseline_activation(-2.0, s) == 0.0);
    CHECK(baseline_activation(1.5, s) == 1.5);
    CHECK_THROWS_AS(baseline_activation(0.0, rc_spec()), contract_error);
}

TEST_CASE("finer derivative at 0 equals omega0") {
    ActivationSpec s;
    s.kind = ActivationKind::FinerSine;
    s.omega0 = 30.0;
    CHECK(activation_grads(0.0, s).d_x == doctest::Approx(30.0).epsilon(1e-12));
    const double fd = testutil::central_diff(
        [&](double h) { return baseline_activation(h, s); }, 1e-7);
    CHECK(fd == doctest::Approx(30.0).epsilon(1e-6));
}

TEST_CASE("init_activation follows the task-specific scheme") {
    const ActivationSpec fit = init_activation(TaskFamily::Fitting, 0);
    CHECK(fit.T == 1.0);
    CHECK(fit.sigma == 2.0);
    CHECK(fit.beta == 0.05);
    CHECK(fit.zeta == 1.0);
    CHECK(fit.learnable);
    const ActivationSpec restore = init_activation(TaskFamily::Restoration, 2);
    CHECK(restore.zeta == 0.0);
    CHECK(restore.beta == 0.05);
}

TEST_CASE("gradcheck: every kind, every learnable scalar") {
    Rng rng(57);
    const ActivationKind kinds[] = {
        ActivationKind::RcGauss,       ActivationKind::Sine,
        ActivationKind::FinerSine,     ActivationKind::Gaussian,
        ActivationKind::RaisedCosineOnly, ActivationKind::SincOnly,
    };
    for (ActivationKind kind : kinds) {
        for (int i = 0; i < 60; ++i) {
            ActivationSpec s;
            s.kind = kind;
            s.T = rng.uniform(0.5, 2.0);
            s.sigma = rng.uniform(0.8, 3.0);
            s.zeta = rng.uniform(-1.5, 1.5);
            s.omega0 = kind == ActivationKind::Gaussian ? 10.0 : 30.0;
            double x = rng.uniform(-2.0, 2.0);
            if (kind == ActivationKind::FinerSine && std::fabs(x) < 1e-3) x += 0.01;
            const double xs = s.T / (2.0 * s.beta);
            if (std::fabs(std::fabs(x) - xs) < 2e-3) continue;

            const ActivationGrads g = activation_grads(x, s);
            const double fdx = testutil::central_diff(
                [&](double h) { return activation_value(x + h, s); }, 1e-6);
            CHECK(testutil::rel_err(g.d_x, fdx) < 1e-5);

            if (kind == ActivationKind::RcGauss) {
                const double fdT = testutil::central_diff(
                    [&](double h) {
                        ActivationSpec p = s;
                        p.T += h;
                        return activation_value(x, p);
                    },
                    1e-6);
                const double fdS = testutil::central_diff(
                    [&](double h) {
                        ActivationSpec p = s;
                        p.sigma += h;
                        return activation_value(x, p);
                    },
                    1e-6);
                const double fdZ = testutil::central_diff(
                    [&](double h) {
                        ActivationSpec p = s;
                        p.zeta += h;
                        return activation_value(x, p);
                    },
                    1e-6);
                CHECK(testutil::rel_err(g.d_T, fdT) < 1e-5);
                CHECK(testutil::rel_err(g.d_sigma, fdS) < 1e-5);
                CHECK(testutil::rel_err(g.d_zeta, fdZ) < 1e-5);
            }
        }
    }
}

TEST_CASE("gradcheck just outside the guard band near the singular point") {
    const ActivationSpec s = rc_spec(1.0, 2.0, 0.5);
    for (double x : {10.0 - 2e-3, 10.0 + 2e-3, 9.5, 10.5}) {
        const ActivationGrads g = activation_grads(x, s);
        const double fdx = testutil::central_diff(
            [&](double h) { return activation_value(x + h, s); }, 1e-7);
        CHECK(testutil::rel_err(g.d_x, fdx) < 1e-4);
    }
}

TEST_CASE("guard band derivatives stay finite and consistent") {
    const ActivationSpec s = rc_spec(1.0, 2.0, 1.0);
    for (double x : {10.0, 10.0 + 5e-4, 10.0 - 5e-4}) {
        const ActivationGrads g = activation_grads(x, s);
        CHECK(std::isfinite(g.d_x));
        CHECK(std::isfinite(g.d_T));
        CHECK(std::isfinite(g.d_sigma));
        CHECK(std::isfinite(g.d_zeta));
    }
}

TEST_CASE("activation name round trip") {
    for (ActivationKind k : {ActivationKind::RcGauss, ActivationKind::Sine,
                             ActivationKind::FinerSine, ActivationKind::Gaussian,
                             ActivationKind::ReluPE, ActivationKind::RaisedCosineOnly,
                             ActivationKind::SincOnly})
        CHECK(activation_from_name(activation_name(k)) == k);
    CHECK_THROWS_AS(activation_from_name("tanh"), config_error);
}

}  // TEST_SUITE

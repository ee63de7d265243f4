#pragma once

#include <string>

namespace flair {

enum class ActivationKind {
    RcGauss,
    Sine,
    FinerSine,
    Gaussian,
    ReluPE,
    RaisedCosineOnly,
    SincOnly,
};

const char* activation_name(ActivationKind kind);
ActivationKind activation_from_name(const std::string& name);  // throws config_error

enum class TaskFamily { Fitting, Restoration };

// Which nonlinearity a layer applies plus its scalar parameters.
// T, sigma, zeta are learnable for RcGauss; beta stays fixed; omega0 is the
// frequency scale of the sine/Gaussian baselines and is never trained.
struct ActivationSpec {
    ActivationKind kind = ActivationKind::RcGauss;
    double T = 1.0;
    double sigma = 2.0;
    double zeta = 1.0;
    double beta = 0.05;
    double omega0 = 30.0;
    bool learnable = false;
};

// Raised-cosine kernel sinc(x/T)/T * cos(pi*beta*x/T) / (1 - (2*beta*x/T)^2).
// The removable singularity at |x| = T/(2*beta) is evaluated by its limit
// (correction factor pi/4), making this a total function.
double rc_basis(double x, double T, double beta);

// rc_basis * Gaussian envelope * cosine modulation: the real part of the
// complex-modulated basis. Requires spec.kind == RcGauss.
double rc_gauss(double x, const ActivationSpec& spec);

// Any non-RcGauss nonlinearity. Requires spec.kind != RcGauss.
double baseline_activation(double x, const ActivationSpec& spec);

// Dispatches on spec.kind.
double activation_value(double x, const ActivationSpec& spec);

// Partial derivatives of activation_value at x. For RcGauss / RC-only /
// sinc-only inputs inside the guard band around the raised-cosine
// singularity, d_x and d_T fall back to central differences (the closed
// forms are numerically catastrophic there).
struct ActivationGrads {
    double d_x = 0.0;
    double d_T = 0.0;
    double d_sigma = 0.0;
    double d_zeta = 0.0;
};
ActivationGrads activation_grads(double x, const ActivationSpec& spec);

// Value and partials in one pass over shared subexpressions; this is the
// training hot path. need_param_grads skips the T/sigma/zeta partials.
struct ActivationEval {
    double value = 0.0;
    double d_x = 0.0;
    double d_T = 0.0;
    double d_sigma = 0.0;
    double d_zeta = 0.0;
};
ActivationEval activation_eval(double x, const ActivationSpec& spec,
                               bool need_param_grads = true);

// Paper-specified initialization: T=1, sigma=2, beta=0.05 fixed, and
// zeta=1 for fitting / zeta=0 for restoration (SR, denoising).
ActivationSpec init_activation(TaskFamily task, int layer_index);

// Per-kind default frequency scale used when a config leaves omega0 unset.
double default_omega0(ActivationKind kind);

// Uniform weight-init half-width for a layer feeding this activation.
// RC-GAUSS and the non-periodic baselines use sqrt(6/fan_in); SIREN/FINER
// use their published scheme (1/fan_in first layer, sqrt(6/fan_in)/omega0
// after).
double weight_init_bound(const ActivationSpec& spec, int fan_in, bool first_layer);

}  // namespace flair

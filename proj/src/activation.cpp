#include "flair/activation.hpp"

#include <cmath>

#include "flair/errors.hpp"

namespace flair {

namespace {

constexpr double kSingularDenomEps = 1e-8;  // |1-(2bx/T)^2| below this -> pi/4 limit
constexpr double kGuardBand = 1e-3;         // distance to x_s where analytic d/dx, d/dT give way
constexpr double kFdStep = 1e-6;

// sin(pi*x/T) / (pi*x); equals sinc(x/T)/T with the normalized sinc.
double sinc_term(double x, double T) {
    const double u = M_PI * x / T;
    if (std::fabs(u) < 1e-6) return (1.0 - u * u / 6.0) / T;  // series, error O(u^4)
    return std::sin(u) / (M_PI * x);
}

double correction_term(double x, double T, double beta) {
    const double r = x / T;
    const double d = 1.0 - (2.0 * beta * r) * (2.0 * beta * r);
    if (std::fabs(d) < kSingularDenomEps) return M_PI / 4.0;
    return std::cos(M_PI * beta * r) / d;
}

bool in_guard_band(double x, double T, double beta) {
    return std::fabs(std::fabs(x) - T / (2.0 * beta)) < kGuardBand;
}

double envelope(double x, double sigma) { return std::exp(-x * x / (2.0 * sigma * sigma)); }

// Value-only evaluation of the RC family, used by the guard-band fallback.
double rc_family_value(double x, const ActivationSpec& spec, bool with_corr, bool with_env) {
    double v = sinc_term(x, spec.T);
    if (with_corr) v *= correction_term(x, spec.T, spec.beta);
    if (with_env) v *= envelope(x, spec.sigma);
    return v * std::cos(2.0 * M_PI * spec.zeta * x);
}

}  // namespace

const char* activation_name(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::RcGauss: return "rc-gauss";
        case ActivationKind::Sine: return "sine";
        case ActivationKind::FinerSine: return "finer";
        case ActivationKind::Gaussian: return "gaussian";
        case ActivationKind::ReluPE: return "relu-pe";
        case ActivationKind::RaisedCosineOnly: return "rc-only";
        case ActivationKind::SincOnly: return "sinc-only";
    }
    return "?";
}

ActivationKind activation_from_name(const std::string& name) {
    if (name == "rc-gauss") return ActivationKind::RcGauss;
    if (name == "sine" || name == "siren") return ActivationKind::Sine;
    if (name == "finer") return ActivationKind::FinerSine;
    if (name == "gaussian" || name == "gauss") return ActivationKind::Gaussian;
    if (name == "relu-pe") return ActivationKind::ReluPE;
    if (name == "rc-only") return ActivationKind::RaisedCosineOnly;
    if (name == "sinc-only") return ActivationKind::SincOnly;
    throw config_error("unknown activation '" + name + "'");
}

double rc_basis(double x, double T, double beta) {
    return sinc_term(x, T) * correction_term(x, T, beta);
}

double rc_gauss(double x, const ActivationSpec& spec) {
    return rc_basis(x, spec.T, spec.beta) * envelope(x, spec.sigma) *
           std::cos(2.0 * M_PI * spec.zeta * x);
}

double baseline_activation(double x, const ActivationSpec& spec) {
    switch (spec.kind) {
        case ActivationKind::Sine:
            return std::sin(spec.omega0 * x);
        case ActivationKind::FinerSine:
            return std::sin(spec.omega0 * (std::fabs(x) + 1.0) * x);
        case ActivationKind::Gaussian: {
            const double s = spec.omega0 * x;
            return std::exp(-s * s);
        }
        case ActivationKind::ReluPE:
            return x > 0.0 ? x : 0.0;
        case ActivationKind::RaisedCosineOnly:
            return rc_basis(x, spec.T, spec.beta) * std::cos(2.0 * M_PI * spec.zeta * x);
        case ActivationKind::SincOnly:
            return sinc_term(x, spec.T) * std::cos(2.0 * M_PI * spec.zeta * x);
        case ActivationKind::RcGauss:
            break;
    }
    throw contract_error("baseline_activation called with RcGauss spec");
}

double activation_value(double x, const ActivationSpec& spec) {
    return spec.kind == ActivationKind::RcGauss ? rc_gauss(x, spec) : baseline_activation(x, spec);
}

ActivationEval activation_eval(double x, const ActivationSpec& spec, bool need_param_grads) {
    ActivationEval out;
    switch (spec.kind) {
        case ActivationKind::Sine: {
            const double u = spec.omega0 * x;
            out.value = std::sin(u);
            out.d_x = spec.omega0 * std::cos(u);
            return out;
        }
        case ActivationKind::FinerSine: {
            const double u = spec.omega0 * (std::fabs(x) + 1.0) * x;
            out.value = std::sin(u);
            out.d_x = spec.omega0 * (2.0 * std::fabs(x) + 1.0) * std::cos(u);
            return out;
        }
        case ActivationKind::Gaussian: {
            const double s = spec.omega0 * x;
            out.value = std::exp(-s * s);
            out.d_x = -2.0 * spec.omega0 * s * out.value;
            return out;
        }
        case ActivationKind::ReluPE:
            out.value = x > 0.0 ? x : 0.0;
            out.d_x = x > 0.0 ? 1.0 : 0.0;
            return out;
        default:
            break;
    }

    // RC family: psi = s(x) * c(x) * e(x) * m(x); every sin/cos pair shares
    // its argument so the compiler can emit sincos.
    const double T = spec.T, beta = spec.beta, sigma = spec.sigma, zeta = spec.zeta;
    const bool with_env = spec.kind == ActivationKind::RcGauss;
    const bool with_corr = spec.kind != ActivationKind::SincOnly;

    const double a = M_PI / T;
    const double u = a * x;
    const double sin_u = std::sin(u);
    const double cos_u = std::cos(u);
    const double s = std::fabs(u) < 1e-6 ? (1.0 - u * u / 6.0) / T : sin_u / (M_PI * x);
    const double s_x =
        std::fabs(u) < 1e-4 ? -a * a * a * x / (3.0 * M_PI) : (u * cos_u - sin_u) / (M_PI * x * x);
    const double s_T = -cos_u / (T * T);

    double c = 1.0, c_x = 0.0, c_T = 0.0;
    if (with_corr) {
        const double r = x / T;
        const double d = 1.0 - (2.0 * beta * r) * (2.0 * beta * r);
        const double v = M_PI * beta * r;
        const double sin_v = std::sin(v);
        const double cos_v = std::cos(v);
        if (std::fabs(d) < kSingularDenomEps) {
            c = M_PI / 4.0;
        } else {
            c = cos_v / d;
            const double c_r = (-M_PI * beta * sin_v * d + cos_v * 8.0 * beta * beta * r) / (d * d);
            c_x = c_r / T;
            c_T = -c_r * x / (T * T);
        }
    }

    double e = 1.0, e_x = 0.0, e_sigma = 0.0;
    if (with_env) {
        e = std::exp(-x * x / (2.0 * sigma * sigma));
        e_x = -x / (sigma * sigma) * e;
        e_sigma = x * x / (sigma * sigma * sigma) * e;
    }

    const double w = 2.0 * M_PI * zeta * x;
    const double mc = std::cos(w);
    const double ms = std::sin(w);

    out.value = s * c * e * mc;
    out.d_x = (s_x * c + s * c_x) * e * mc + s * c * (e_x * mc - e * 2.0 * M_PI * zeta * ms);
    if (need_param_grads) {
        out.d_T = (s_T * c + s * c_T) * e * mc;
        out.d_sigma = s * c * e_sigma * mc;
        out.d_zeta = s * c * e * (-2.0 * M_PI * x * ms);
    }

    if (with_corr && in_guard_band(x, T, beta)) {
        ActivationSpec probe = spec;
        out.d_x = (rc_family_value(x + kFdStep, probe, with_corr, with_env) -
                   rc_family_value(x - kFdStep, probe, with_corr, with_env)) /
                  (2.0 * kFdStep);
        if (need_param_grads) {
            probe.T = T + kFdStep;
            const double up = rc_family_value(x, probe, with_corr, with_env);
            probe.T = T - kFdStep;
            const double dn = rc_family_value(x, probe, with_corr, with_env);
            out.d_T = (up - dn) / (2.0 * kFdStep);
        }
    }
    return out;
}

ActivationGrads activation_grads(double x, const ActivationSpec& spec) {
    const ActivationEval e = activation_eval(x, spec, true);
    return {e.d_x, e.d_T, e.d_sigma, e.d_zeta};
}

ActivationSpec init_activation(TaskFamily task, int /*layer_index*/) {
    ActivationSpec spec;
    spec.kind = ActivationKind::RcGauss;
    spec.T = 1.0;
    spec.sigma = 2.0;
    spec.beta = 0.05;
    spec.zeta = task == TaskFamily::Fitting ? 1.0 : 0.0;
    spec.learnable = true;
    return spec;
}

double default_omega0(ActivationKind kind) {
    // Narrower Gaussians than the sine-family scale perform best as a baseline.
    return kind == ActivationKind::Gaussian ? 10.0 : 30.0;
}

double weight_init_bound(const ActivationSpec& spec, int fan_in, bool first_layer) {
    const double fan = static_cast<double>(fan_in);
    switch (spec.kind) {
        case ActivationKind::Sine:
        case ActivationKind::FinerSine:
            return first_layer ? 1.0 / fan : std::sqrt(6.0 / fan) / spec.omega0;
        default:
            return std::sqrt(6.0 / fan);
    }
}

}  // namespace flair

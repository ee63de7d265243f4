#pragma once

#include <array>
#include <string>
#include <vector>

#include "flair/activation.hpp"
#include "flair/matrix.hpp"
#include "flair/rng.hpp"

namespace flair {

// Per-axis sinusoidal lift [x, sin(2^k pi x), cos(2^k pi x)]_{k<B}; output
// width is (1 + 2B) per input axis.
Matrix positional_encode(const Matrix& coords, int pe_bands);

// Coordinate MLP: input lift (ReLU+PE only), hidden affine layers with an
// elementwise activation, affine head with no activation.
struct InrModel {
    struct Layer {
        Matrix W;  // in x out
        Matrix b;  // 1 x out
        ActivationSpec act;
        bool has_activation = true;
    };

    int input_dim = 2;
    int output_dim = 1;
    int pe_bands = 0;     // > 0 only for ReLU+PE
    int pe_raw_tail = 0;  // trailing input channels excluded from the lift (WEGE score)
    std::vector<Layer> layers;

    // Width of the first affine layer's input after any positional lift.
    int lifted_dim() const {
        if (pe_bands <= 0) return input_dim;
        return (input_dim - pe_raw_tail) * (1 + 2 * pe_bands) + pe_raw_tail;
    }
    int hidden_layer_count() const { return static_cast<int>(layers.size()) - 1; }
    size_t parameter_count() const;

    // Batched forward pass over N x input_dim coordinates; output is left
    // unclamped (rasterization clamps to [0,1] separately). Safe to call
    // concurrently on a frozen model.
    Matrix predict(const Matrix& coords) const;

    // Learned activation scalars (T, sigma, zeta) per hidden layer.
    std::vector<std::array<double, 3>> activation_scalars() const;

    void save(const std::string& path) const;
    static InrModel load(const std::string& path);
};

// Positional lift of the model's spatial columns; raw-tail channels are
// appended unencoded. Identity when the model has no PE.
Matrix lift_inputs(const InrModel& model, const Matrix& coords);

// Builds a hidden_layers x hidden_width MLP whose hidden activations all use
// `hidden_act` (per-layer copies, so scalars can diverge during training).
// Weight init follows the activation's scheme.
InrModel make_model(int input_dim, int output_dim, int hidden_layers, int hidden_width,
                    const ActivationSpec& hidden_act, int pe_bands, Rng& rng,
                    int pe_raw_tail = 0);

}  // namespace flair

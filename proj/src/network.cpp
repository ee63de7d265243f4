#include "flair/network.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "flair/errors.hpp"

namespace flair {

namespace {

constexpr char kMagic[4] = {'F', 'L', 'R', '1'};

void put_u32(std::ostream& os, uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void put_f64(std::ostream& os, double v) {
    uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace

Matrix positional_encode(const Matrix& coords, int pe_bands) {
    if (pe_bands < 1) throw contract_error("positional_encode: pe_bands must be >= 1");
    const int d = coords.cols;
    const int per_axis = 1 + 2 * pe_bands;
    Matrix out(coords.rows, d * per_axis);
    for (int r = 0; r < coords.rows; ++r) {
        for (int a = 0; a < d; ++a) {
            const double x = coords.at(r, a);
            int c = a * per_axis;
            out.at(r, c++) = x;
            double freq = M_PI;  // 2^0 * pi
            for (int k = 0; k < pe_bands; ++k, freq *= 2.0) {
                out.at(r, c++) = std::sin(freq * x);
                out.at(r, c++) = std::cos(freq * x);
            }
        }
    }
    return out;
}

size_t InrModel::parameter_count() const {
    size_t n = 0;
    for (const Layer& l : layers) {
        n += l.W.size() + l.b.size();
        if (l.has_activation && l.act.learnable) n += 3;  // T, sigma, zeta
    }
    return n;
}

Matrix lift_inputs(const InrModel& model, const Matrix& coords) {
    if (coords.cols != model.input_dim)
        throw dimension_error("lift_inputs: expected N x " + std::to_string(model.input_dim) +
                              " coordinates, got " + coords.shape_str());
    if (model.pe_bands <= 0) return coords;
    const int spatial = model.input_dim - model.pe_raw_tail;
    Matrix head(coords.rows, spatial);
    for (int r = 0; r < coords.rows; ++r)
        for (int c = 0; c < spatial; ++c) head.at(r, c) = coords.at(r, c);
    Matrix lifted = positional_encode(head, model.pe_bands);
    if (model.pe_raw_tail == 0) return lifted;
    Matrix out(coords.rows, lifted.cols + model.pe_raw_tail);
    for (int r = 0; r < coords.rows; ++r) {
        for (int c = 0; c < lifted.cols; ++c) out.at(r, c) = lifted.at(r, c);
        for (int c = 0; c < model.pe_raw_tail; ++c)
            out.at(r, lifted.cols + c) = coords.at(r, spatial + c);
    }
    return out;
}

Matrix InrModel::predict(const Matrix& coords) const {
    if (coords.cols != input_dim)
        throw dimension_error("predict: expected N x " + std::to_string(input_dim) +
                              " coordinates, got " + coords.shape_str());
    Matrix z = lift_inputs(*this, coords);
    for (const Layer& l : layers) {
        Matrix h = matmul(z, l.W);
        add_row_inplace(h, l.b);
        if (l.has_activation)
            for (double& v : h.data) v = activation_value(v, l.act);
        z = std::move(h);
    }
    return z;
}

std::vector<std::array<double, 3>> InrModel::activation_scalars() const {
    std::vector<std::array<double, 3>> out;
    for (const Layer& l : layers)
        if (l.has_activation) out.push_back({l.act.T, l.act.sigma, l.act.zeta});
    return out;
}

void InrModel::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot write model file " + path);
    os.write(kMagic, 4);
    put_u32(os, static_cast<uint32_t>(input_dim));
    put_u32(os, static_cast<uint32_t>(output_dim));
    put_u32(os, static_cast<uint32_t>(pe_bands));
    put_u32(os, static_cast<uint32_t>(pe_raw_tail));
    put_u32(os, static_cast<uint32_t>(layers.size()));
    for (const Layer& l : layers) {
        put_u32(os, static_cast<uint32_t>(l.W.rows));
        put_u32(os, static_cast<uint32_t>(l.W.cols));
        put_u32(os, static_cast<uint32_t>(l.act.kind));
        put_u32(os, (l.has_activation ? 1u : 0u) | (l.act.learnable ? 2u : 0u));
        put_f64(os, l.act.T);
        put_f64(os, l.act.sigma);
        put_f64(os, l.act.zeta);
        put_f64(os, l.act.beta);
        put_f64(os, l.act.omega0);
        for (double v : l.W.data) put_f64(os, v);
        for (double v : l.b.data) put_f64(os, v);
    }
    if (!os) throw io_error("short write to model file " + path);
}

InrModel InrModel::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open model file " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw io_error(path + " is not an FLR1 model file");
    InrModel m;
    m.input_dim = static_cast<int>(get_u32(is));
    m.output_dim = static_cast<int>(get_u32(is));
    m.pe_bands = static_cast<int>(get_u32(is));
    m.pe_raw_tail = static_cast<int>(get_u32(is));
    const uint32_t n_layers = get_u32(is);
    for (uint32_t i = 0; i < n_layers; ++i) {
        Layer l;
        const int rows = static_cast<int>(get_u32(is));
        const int cols = static_cast<int>(get_u32(is));
        l.act.kind = static_cast<ActivationKind>(get_u32(is));
        const uint32_t flags = get_u32(is);
        l.has_activation = (flags & 1u) != 0;
        l.act.learnable = (flags & 2u) != 0;
        l.act.T = get_f64(is);
        l.act.sigma = get_f64(is);
        l.act.zeta = get_f64(is);
        l.act.beta = get_f64(is);
        l.act.omega0 = get_f64(is);
        l.W = Matrix(rows, cols);
        for (double& v : l.W.data) v = get_f64(is);
        l.b = Matrix(1, cols);
        for (double& v : l.b.data) v = get_f64(is);
        if (!is) throw io_error("truncated model file " + path);
        m.layers.push_back(std::move(l));
    }
    return m;
}

InrModel make_model(int input_dim, int output_dim, int hidden_layers, int hidden_width,
                    const ActivationSpec& hidden_act, int pe_bands, Rng& rng, int pe_raw_tail) {
    if (hidden_layers < 1 || hidden_width < 1)
        throw contract_error("make_model: need at least one hidden layer and unit");
    InrModel m;
    m.input_dim = input_dim;
    m.output_dim = output_dim;
    m.pe_bands = hidden_act.kind == ActivationKind::ReluPE ? pe_bands : 0;
    m.pe_raw_tail = m.pe_bands > 0 ? pe_raw_tail : 0;

    int fan_in = m.lifted_dim();
    for (int l = 0; l < hidden_layers; ++l) {
        InrModel::Layer layer;
        layer.act = hidden_act;
        layer.has_activation = true;
        const double wb = weight_init_bound(hidden_act, fan_in, l == 0);
        const double bb = 1.0 / std::sqrt(static_cast<double>(fan_in));
        layer.W = Matrix(fan_in, hidden_width);
        for (double& v : layer.W.data) v = rng.uniform(-wb, wb);
        layer.b = Matrix(1, hidden_width);
        for (double& v : layer.b.data) v = rng.uniform(-bb, bb);
        m.layers.push_back(std::move(layer));
        fan_in = hidden_width;
    }

    InrModel::Layer head;
    head.has_activation = false;
    head.act = hidden_act;
    head.act.learnable = false;
    const double hb = std::sqrt(6.0 / fan_in);
    head.W = Matrix(fan_in, output_dim);
    for (double& v : head.W.data) v = rng.uniform(-hb, hb);
    head.b = Matrix(1, output_dim);
    for (double& v : head.b.data) v = rng.uniform(-1.0 / std::sqrt(static_cast<double>(fan_in)),
                                                  1.0 / std::sqrt(static_cast<double>(fan_in)));
    m.layers.push_back(std::move(head));
    return m;
}

}  // namespace flair

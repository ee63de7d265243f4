#include "flair/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "flair/errors.hpp"
#include "flair/metrics.hpp"
#include "flair/rng.hpp"
#include "flair/trainer.hpp"

namespace flair {

namespace {

constexpr int kMaxGridDim = 256;  // desk-scale occupancy bound

void put_u32_le(std::ostream& os, uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32_le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

const char* filter_name(ScoreFilter f) {
    switch (f) {
        case ScoreFilter::Guided: return "guided";
        case ScoreFilter::Bilateral: return "bilateral";
        case ScoreFilter::None: return "none";
    }
    return "?";
}

ActivationSpec resolve_activation(const TrainConfig& cfg, TaskFamily family) {
    ActivationSpec spec = init_activation(family, 0);
    spec.kind = cfg.activation;
    spec.learnable = cfg.activation == ActivationKind::RcGauss;
    spec.omega0 = cfg.omega0 > 0.0 ? cfg.omega0 : default_omega0(cfg.activation);
    if (!std::isnan(cfg.t_init)) spec.T = cfg.t_init;
    if (!std::isnan(cfg.sigma_init)) spec.sigma = cfg.sigma_init;
    if (!std::isnan(cfg.zeta_init)) spec.zeta = cfg.zeta_init;
    return spec;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows, a.cols + b.cols);
    for (int r = 0; r < a.rows; ++r) {
        for (int c = 0; c < a.cols; ++c) out.at(r, c) = a.at(r, c);
        for (int c = 0; c < b.cols; ++c) out.at(r, a.cols + c) = b.at(r, c);
    }
    return out;
}

Matrix image_targets(const Image& img) {
    Matrix t(static_cast<int>(img.pixel_count()), img.c);
    std::copy(img.data.begin(), img.data.end(), t.data.begin());
    return t;
}

struct Pipeline {
    InrModel model;
    Matrix train_coords;  // raw (pre-lift) inputs, guidance column included
    std::optional<EnergyMap> wege_map;
};

// Shared setup for the 2D tasks: coordinates, optional WEGE channel, model.
Pipeline make_image_pipeline(const Image& observed, const TrainConfig& cfg, TaskFamily family,
                             Rng& rng) {
    Pipeline p;
    Matrix coords = grid_coords(observed.h, observed.w);
    int input_dim = 2;
    if (cfg.wege.enabled) {
        p.wege_map = EnergyMap::build(observed, cfg.wege);
        coords = concat_cols(coords, sample_guidance(*p.wege_map, coords));
        input_dim = 3;
    }
    const ActivationSpec act = resolve_activation(cfg, family);
    p.model = make_model(input_dim, observed.c, cfg.hidden_layers, cfg.hidden_width, act,
                         cfg.pe_bands, rng, cfg.wege.enabled ? 1 : 0);
    p.train_coords = std::move(coords);
    return p;
}

TrainLoopOptions loop_options(const TrainConfig& cfg) {
    TrainLoopOptions o;
    o.iterations = cfg.iterations;
    o.lr = cfg.lr;
    o.batch_size = cfg.batch_size;
    o.batch_seed = cfg.seed ^ 0x9e3779b97f4a7c15ull;
    return o;
}

void fill_common(TaskReport& rep, const TrainConfig& cfg, const TrainResult& tr,
                 const InrModel& model) {
    rep.loss_curve = tr.loss_curve;
    rep.diverged = tr.diverged;
    rep.iterations_run = tr.iterations_run;
    rep.seed = cfg.seed;
    rep.learned_params = model.activation_scalars();
    rep.config_echo = train_config_to_json(cfg);
}

void save_artifacts(TaskReport& rep, const InrModel& model, const Pipeline& p,
                    const OutputOptions& out, const TrainConfig& cfg) {
    if (out.out_dir.empty()) return;
    std::filesystem::create_directories(out.out_dir);
    if (out.save_model) {
        const std::string mp = out.out_dir + "/model.flr";
        model.save(mp);
        rep.outputs["model"] = mp;
    }
    if (out.dump_wege && p.wege_map) {
        dump_energy_maps(*p.wege_map, out.out_dir);
        rep.outputs["wege_maps"] = out.out_dir + "/wege_{raw,normalized,filtered}.{png,csv}";
    }
    rep.write(out.out_dir, cfg.log_every);
}

}  // namespace

OccupancyGrid load_occupancy(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open occupancy file " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "OCC1", 4) != 0)
        throw io_error(path + " is not an OCC1 grid");
    OccupancyGrid g;
    g.d = static_cast<int>(get_u32_le(is));
    g.h = static_cast<int>(get_u32_le(is));
    g.w = static_cast<int>(get_u32_le(is));
    if (g.d <= 0 || g.h <= 0 || g.w <= 0 || g.d > kMaxGridDim || g.h > kMaxGridDim ||
        g.w > kMaxGridDim)
        throw contract_error(path + ": occupancy dims must be within 1.." +
                             std::to_string(kMaxGridDim));
    g.voxels.resize(g.count());
    is.read(reinterpret_cast<char*>(g.voxels.data()), static_cast<std::streamsize>(g.count()));
    if (!is) throw io_error(path + ": truncated voxel payload");
    for (uint8_t v : g.voxels)
        if (v > 1) throw contract_error(path + ": voxel values must be 0 or 1");
    return g;
}

void save_occupancy(const std::string& path, const OccupancyGrid& grid) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot write occupancy file " + path);
    os.write("OCC1", 4);
    put_u32_le(os, static_cast<uint32_t>(grid.d));
    put_u32_le(os, static_cast<uint32_t>(grid.h));
    put_u32_le(os, static_cast<uint32_t>(grid.w));
    os.write(reinterpret_cast<const char*>(grid.voxels.data()),
             static_cast<std::streamsize>(grid.voxels.size()));
    if (!os) throw io_error("short write to " + path);
}

json wege_to_json(const WegeOptions& w) {
    return json{{"enabled", w.enabled},          {"filter", filter_name(w.filter)},
                {"r", w.radius},                 {"reg", w.reg},
                {"spatial_sigma", w.spatial_sigma}, {"range_sigma", w.range_sigma},
                {"norm_eps", w.norm_eps},        {"absolute_energy", w.absolute_energy}};
}

json train_config_to_json(const TrainConfig& cfg) {
    json j{{"activation", activation_name(cfg.activation)},
           {"hidden_layers", cfg.hidden_layers},
           {"hidden_width", cfg.hidden_width},
           {"iters", cfg.iterations},
           {"lr", cfg.lr},
           {"seed", cfg.seed},
           {"pe_bands", cfg.pe_bands},
           {"batch_size", cfg.batch_size},
           {"log_every", cfg.log_every},
           {"wege", wege_to_json(cfg.wege)}};
    if (cfg.omega0 > 0.0) j["omega0"] = cfg.omega0;
    if (!std::isnan(cfg.t_init)) j["t_init"] = cfg.t_init;
    if (!std::isnan(cfg.sigma_init)) j["sigma_init"] = cfg.sigma_init;
    if (!std::isnan(cfg.zeta_init)) j["zeta_init"] = cfg.zeta_init;
    return j;
}

json TaskReport::to_json() const {
    json j;
    j["schema"] = 1;
    j["task"] = task;
    j["seed"] = seed;
    j["config"] = config_echo;
    json m;
    if (!std::isnan(psnr)) m["psnr"] = psnr;
    if (!std::isnan(ssim)) m["ssim"] = ssim;
    if (iou) m["iou"] = *iou;
    for (const auto& [k, v] : extra_metrics) m[k] = v;
    j["metrics"] = m;
    json lp = json::array();
    for (size_t l = 0; l < learned_params.size(); ++l)
        lp.push_back({{"layer", l + 1},
                      {"T", learned_params[l][0]},
                      {"sigma", learned_params[l][1]},
                      {"zeta", learned_params[l][2]}});
    j["learned_params"] = lp;
    j["iterations_run"] = iterations_run;
    j["diverged"] = diverged;
    j["final_loss"] = loss_curve.empty() ? json() : json(loss_curve.back());
    j["outputs"] = outputs;
    return j;
}

void TaskReport::write(const std::string& dir, int log_every) {
    std::filesystem::create_directories(dir);
    const std::string loss_path = dir + "/loss.csv";
    {
        std::ofstream os(loss_path);
        if (!os) throw io_error("cannot write " + loss_path);
        os.precision(17);
        os << "iteration,mse\n";
        const int stride = std::max(1, log_every);
        for (size_t i = 0; i < loss_curve.size(); ++i)
            if (i % stride == 0 || i + 1 == loss_curve.size())
                os << i << "," << loss_curve[i] << "\n";
    }
    outputs["loss_csv"] = loss_path;
    const std::string rp = dir + "/report.json";
    std::ofstream os(rp);
    if (!os) throw io_error("cannot write " + rp);
    os << to_json().dump(2) << "\n";
}

double mse_loss(const Matrix& pred, const Matrix& target) {
    if (!pred.same_shape(target))
        throw dimension_error("mse_loss: " + pred.shape_str() + " vs " + target.shape_str());
    if (pred.rows == 0) throw contract_error("mse_loss: empty batch");
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        acc += d * d;
    }
    return acc / pred.rows;
}

Image add_noise(const Image& image, double poisson_level, double gaussian_sigma, uint64_t seed) {
    if (poisson_level <= 0.0) throw contract_error("add_noise: poisson_level must be > 0");
    Rng rng(seed);
    Image out = image;
    for (double& v : out.data) {
        const double k = static_cast<double>(rng.poisson(poisson_level * v));
        const double noisy = (k + gaussian_sigma * rng.normal()) / poisson_level;
        v = std::clamp(noisy, 0.0, 1.0);
    }
    return out;
}

Matrix predict_chunked(const InrModel& model, const Matrix& coords, int chunk) {
    Matrix out(coords.rows, model.output_dim);
    for (int lo = 0; lo < coords.rows; lo += chunk) {
        const int n = std::min(chunk, coords.rows - lo);
        Matrix block(n, coords.cols);
        std::copy_n(coords.data.begin() + static_cast<size_t>(lo) * coords.cols,
                    static_cast<size_t>(n) * coords.cols, block.data.begin());
        const Matrix pred = model.predict(block);
        std::copy_n(pred.data.begin(), pred.data.size(),
                    out.data.begin() + static_cast<size_t>(lo) * out.cols);
    }
    return out;
}

TaskReport fit_image(const Image& image, const TrainConfig& cfg, const OutputOptions& out) {
    if (image.pixel_count() == 0) throw contract_error("fit_image: empty image");
    Rng rng(cfg.seed);
    Pipeline p = make_image_pipeline(image, cfg, TaskFamily::Fitting, rng);
    const Matrix lifted = lift_inputs(p.model, p.train_coords);
    const TrainResult tr = train_inr(p.model, lifted, image_targets(image), loop_options(cfg));

    TaskReport rep;
    rep.task = "fit";
    fill_common(rep, cfg, tr, p.model);
    const Image recon = rasterize(predict_chunked(p.model, p.train_coords), image.h, image.w);
    rep.psnr = psnr(recon, image);
    if (image.h >= 11 && image.w >= 11) rep.ssim = ssim(recon, image);

    if (!out.out_dir.empty()) {
        const std::string rp = out.out_dir + "/recon.png";
        std::filesystem::create_directories(out.out_dir);
        save_image(rp, recon);
        rep.outputs["reconstruction"] = rp;
    }
    save_artifacts(rep, p.model, p, out, cfg);
    return rep;
}

TaskReport super_resolve(const Image& lr, const Image& hr, double scale, const TrainConfig& cfg,
                         const OutputOptions& out) {
    if (scale < 1.0) throw contract_error("super_resolve: scale must be >= 1");
    if (std::lround(lr.h * scale) != hr.h || std::lround(lr.w * scale) != hr.w ||
        lr.c != hr.c)
        throw contract_error("super_resolve: LR " + std::to_string(lr.h) + "x" +
                             std::to_string(lr.w) + " at x" + std::to_string(scale) +
                             " does not match HR " + std::to_string(hr.h) + "x" +
                             std::to_string(hr.w));
    Rng rng(cfg.seed);
    Pipeline p = make_image_pipeline(lr, cfg, TaskFamily::Restoration, rng);
    const Matrix lifted = lift_inputs(p.model, p.train_coords);
    const TrainResult tr = train_inr(p.model, lifted, image_targets(lr), loop_options(cfg));

    TaskReport rep;
    rep.task = "sr";
    fill_common(rep, cfg, tr, p.model);
    rep.config_echo["scale"] = scale;

    Matrix hr_coords = grid_coords(hr.h, hr.w);
    if (p.wege_map) hr_coords = concat_cols(hr_coords, sample_guidance(*p.wege_map, hr_coords));
    const Image recon = rasterize(predict_chunked(p.model, hr_coords), hr.h, hr.w);
    rep.psnr = psnr(recon, hr);
    if (hr.h >= 11 && hr.w >= 11) rep.ssim = ssim(recon, hr);

    if (!out.out_dir.empty()) {
        std::filesystem::create_directories(out.out_dir);
        save_image(out.out_dir + "/recon.png", recon);
        save_image(out.out_dir + "/lr_input.png", lr);
        rep.outputs["reconstruction"] = out.out_dir + "/recon.png";
        rep.outputs["lr_input"] = out.out_dir + "/lr_input.png";
    }
    save_artifacts(rep, p.model, p, out, cfg);
    return rep;
}

TaskReport denoise(const Image& noisy, const Image& clean, const TrainConfig& cfg,
                   const OutputOptions& out) {
    if (noisy.h != clean.h || noisy.w != clean.w || noisy.c != clean.c)
        throw contract_error("denoise: noisy/clean shapes differ");
    Rng rng(cfg.seed);
    Pipeline p = make_image_pipeline(noisy, cfg, TaskFamily::Restoration, rng);
    const Matrix lifted = lift_inputs(p.model, p.train_coords);
    const TrainResult tr = train_inr(p.model, lifted, image_targets(noisy), loop_options(cfg));

    TaskReport rep;
    rep.task = "denoise";
    fill_common(rep, cfg, tr, p.model);
    const Image recon = rasterize(predict_chunked(p.model, p.train_coords), noisy.h, noisy.w);
    rep.psnr = psnr(recon, clean);
    if (clean.h >= 11 && clean.w >= 11) rep.ssim = ssim(recon, clean);
    rep.extra_metrics["noisy_psnr"] = psnr(noisy, clean);

    if (!out.out_dir.empty()) {
        std::filesystem::create_directories(out.out_dir);
        save_image(out.out_dir + "/recon.png", recon);
        save_image(out.out_dir + "/noisy_input.png", noisy);
        rep.outputs["reconstruction"] = out.out_dir + "/recon.png";
        rep.outputs["noisy_input"] = out.out_dir + "/noisy_input.png";
    }
    save_artifacts(rep, p.model, p, out, cfg);
    return rep;
}

TaskReport fit_occupancy(const OccupancyGrid& grid, const TrainConfig& cfg,
                         const OutputOptions& out) {
    if (grid.count() == 0) throw contract_error("fit_occupancy: empty grid");
    if (grid.d > kMaxGridDim || grid.h > kMaxGridDim || grid.w > kMaxGridDim)
        throw contract_error("fit_occupancy: grid exceeds desk-scale bound " +
                             std::to_string(kMaxGridDim));
    Rng rng(cfg.seed);

    const int n = static_cast<int>(grid.count());
    Matrix coords(n, 3);
    Matrix targets(n, 1);
    int r = 0;
    for (int z = 0; z < grid.d; ++z)
        for (int y = 0; y < grid.h; ++y)
            for (int x = 0; x < grid.w; ++x, ++r) {
                coords.at(r, 0) = 2.0 * (x + 0.5) / grid.w - 1.0;
                coords.at(r, 1) = 2.0 * (y + 0.5) / grid.h - 1.0;
                coords.at(r, 2) = 2.0 * (z + 0.5) / grid.d - 1.0;
                targets.at(r, 0) = grid.voxels[r];
            }

    const ActivationSpec act = resolve_activation(cfg, TaskFamily::Fitting);
    InrModel model = make_model(3, 1, cfg.hidden_layers, cfg.hidden_width, act, cfg.pe_bands, rng);
    const Matrix lifted = lift_inputs(model, coords);
    const TrainResult tr = train_inr(model, lifted, targets, loop_options(cfg));

    TaskReport rep;
    rep.task = "occupancy";
    fill_common(rep, cfg, tr, model);

    const Matrix pred = predict_chunked(model, coords);
    std::vector<uint8_t> pred_bits(grid.count());
    std::vector<double> clamped(grid.count());
    for (size_t i = 0; i < grid.count(); ++i) {
        pred_bits[i] = pred.data[i] > 0.5 ? 1 : 0;
        clamped[i] = std::clamp(pred.data[i], 0.0, 1.0);
    }
    rep.iou = iou(pred_bits, grid.voxels);
    rep.psnr = psnr_values(clamped.data(), targets.data.data(), grid.count());

    if (!out.out_dir.empty()) {
        std::filesystem::create_directories(out.out_dir);
        OccupancyGrid predicted{grid.d, grid.h, grid.w, std::move(pred_bits)};
        save_occupancy(out.out_dir + "/pred.occ1", predicted);
        rep.outputs["predicted_grid"] = out.out_dir + "/pred.occ1";
        if (out.save_model) {
            model.save(out.out_dir + "/model.flr");
            rep.outputs["model"] = out.out_dir + "/model.flr";
        }
        rep.write(out.out_dir, cfg.log_every);
    }
    return rep;
}

}  // namespace flair

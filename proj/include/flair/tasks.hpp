#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "flair/image.hpp"
#include "flair/matrix.hpp"
#include "flair/network.hpp"
#include "flair/wege.hpp"

namespace flair {

using json = nlohmann::json;

// D x H x W binary occupancy field.
struct OccupancyGrid {
    int d = 0, h = 0, w = 0;
    std::vector<uint8_t> voxels;  // row-major, w fastest, values in {0,1}

    size_t count() const { return static_cast<size_t>(d) * h * w; }
};

// Raw binary container: magic "OCC1", three little-endian u32 dims (D,H,W),
// then D*H*W bytes of {0,1}.
OccupancyGrid load_occupancy(const std::string& path);
void save_occupancy(const std::string& path, const OccupancyGrid& grid);

struct TrainConfig {
    ActivationKind activation = ActivationKind::RcGauss;
    int hidden_layers = 4;
    int hidden_width = 256;
    long iterations = 2000;
    double lr = 5e-4;
    uint64_t seed = 1;
    int pe_bands = 10;
    double omega0 = 0.0;  // 0 = per-kind default
    // NaN = task-family default (T=1, sigma=2; zeta=1 fitting / 0 restoration).
    double t_init = std::nan("");
    double sigma_init = std::nan("");
    double zeta_init = std::nan("");
    int batch_size = 0;  // 0 = full batch
    WegeOptions wege;
    double scale = 4.0;           // super-resolution
    double poisson_level = 30.0;  // denoising
    double gaussian_sigma = 2.0;
    int log_every = 1;  // loss.csv stride (curve itself is always per-iteration)
};

json wege_to_json(const WegeOptions& w);
json train_config_to_json(const TrainConfig& cfg);

struct OutputOptions {
    std::string out_dir;  // empty = keep everything in memory
    bool dump_wege = false;
    bool save_model = true;
};

struct TaskReport {
    std::string task;
    std::vector<double> loss_curve;
    double psnr = std::nan("");
    double ssim = std::nan("");
    std::optional<double> iou;
    std::map<std::string, double> extra_metrics;
    std::vector<std::array<double, 3>> learned_params;  // (T, sigma, zeta) per hidden layer
    uint64_t seed = 0;
    bool diverged = false;
    long iterations_run = 0;
    json config_echo;
    std::map<std::string, std::string> outputs;

    json to_json() const;
    // report.json + loss.csv under `dir`.
    void write(const std::string& dir, int log_every = 1);
};

// Mean over samples of the squared L2 residual (sum over output channels).
double mse_loss(const Matrix& pred, const Matrix& target);

// Photon-count noise: k ~ Poisson(level * pixel) plus Gaussian(0, sigma) on
// the count, rescaled by 1/level and clamped to [0,1].
Image add_noise(const Image& image, double poisson_level, double gaussian_sigma, uint64_t seed);

TaskReport fit_image(const Image& image, const TrainConfig& cfg, const OutputOptions& out = {});
TaskReport super_resolve(const Image& lr, const Image& hr, double scale, const TrainConfig& cfg,
                         const OutputOptions& out = {});
TaskReport denoise(const Image& noisy, const Image& clean, const TrainConfig& cfg,
                   const OutputOptions& out = {});
TaskReport fit_occupancy(const OccupancyGrid& grid, const TrainConfig& cfg,
                         const OutputOptions& out = {});

// Forward pass in row blocks (keeps peak memory flat for voxel grids).
Matrix predict_chunked(const InrModel& model, const Matrix& coords, int chunk = 65536);

}  // namespace flair

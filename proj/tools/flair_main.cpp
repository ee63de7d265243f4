#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "flair/analysis.hpp"
#include "flair/errors.hpp"
#include "flair/image.hpp"
#include "flair/metrics.hpp"
#include "flair/runtime.hpp"
#include "flair/tasks.hpp"

namespace {

using flair::json;

// Every flag has a config-file twin; flags win on conflict.
struct Options {
    std::string task;
    std::string config_path;
    std::optional<std::string> image, grid, model_path, out_dir, wavelet;
    std::vector<std::string> activations;
    std::optional<long> iters;
    std::optional<double> lr;
    std::optional<uint64_t> seed;
    std::optional<int> hidden_layers, hidden_width, pe_bands, batch_size, log_every;
    std::optional<double> omega0, t_init, sigma_init, zeta_init;
    std::optional<double> scale, poisson_level, gaussian_sigma;
    std::optional<std::string> wege_mode;
    std::optional<int> wege_r;
    std::optional<double> wege_reg, wege_spatial_sigma, wege_range_sigma;
    std::optional<bool> dump_wege;
    std::optional<int> row, window, hop;
    std::optional<int> ntk_inputs, ntk_neurons, ntk_seeds, samples;
    std::optional<double> halfwidth;
};

const std::set<std::string> kConfigKeys = {
    "schema",        "task",       "image",        "grid",       "model",
    "out_dir",       "activation", "activations",  "iters",      "lr",
    "seed",          "hidden_layers", "hidden_width", "pe_bands", "batch_size",
    "log_every",     "omega0",     "t_init",       "sigma_init", "zeta_init",
    "scale",         "poisson_level", "gaussian_sigma", "wege",   "wavelet",
    "dump_wege",     "row",        "window",       "hop",        "ntk_inputs",
    "ntk_neurons",   "ntk_seeds",  "samples",      "halfwidth"};

const std::set<std::string> kWegeKeys = {"enabled",       "filter",      "r",
                                         "reg",           "spatial_sigma", "range_sigma",
                                         "norm_eps",      "absolute_energy"};

template <typename T>
void take(const json& j, const char* key, std::optional<T>& slot) {
    if (j.contains(key)) slot = j.at(key).get<T>();
}

// Config file values fill any slot the command line left empty.
void merge_config(Options& o, const json& j) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!kConfigKeys.count(it.key()))
            throw flair::config_error("unknown config key '" + it.key() + "'");
    if (j.contains("schema") && j.at("schema").get<int>() != 1)
        throw flair::config_error("unsupported config schema");
    if (j.contains("task")) {
        const auto t = j.at("task").get<std::string>();
        if (t != o.task)
            throw flair::config_error("config task '" + t + "' does not match subcommand '" +
                                      o.task + "'");
    }
    auto fill = [&](auto& slot, const char* key) {
        using T = typename std::decay_t<decltype(slot)>::value_type;
        if (!slot.has_value() && j.contains(key)) slot = j.at(key).get<T>();
    };
    fill(o.image, "image");
    fill(o.grid, "grid");
    fill(o.model_path, "model");
    fill(o.out_dir, "out_dir");
    fill(o.iters, "iters");
    fill(o.lr, "lr");
    fill(o.seed, "seed");
    fill(o.hidden_layers, "hidden_layers");
    fill(o.hidden_width, "hidden_width");
    fill(o.pe_bands, "pe_bands");
    fill(o.batch_size, "batch_size");
    fill(o.log_every, "log_every");
    fill(o.omega0, "omega0");
    fill(o.t_init, "t_init");
    fill(o.sigma_init, "sigma_init");
    fill(o.zeta_init, "zeta_init");
    fill(o.scale, "scale");
    fill(o.poisson_level, "poisson_level");
    fill(o.gaussian_sigma, "gaussian_sigma");
    fill(o.wavelet, "wavelet");
    fill(o.dump_wege, "dump_wege");
    fill(o.row, "row");
    fill(o.window, "window");
    fill(o.hop, "hop");
    fill(o.ntk_inputs, "ntk_inputs");
    fill(o.ntk_neurons, "ntk_neurons");
    fill(o.ntk_seeds, "ntk_seeds");
    fill(o.samples, "samples");
    fill(o.halfwidth, "halfwidth");
    if (o.activations.empty()) {
        if (j.contains("activation")) o.activations.push_back(j.at("activation").get<std::string>());
        if (j.contains("activations"))
            for (const auto& a : j.at("activations")) o.activations.push_back(a.get<std::string>());
    }
    if (j.contains("wege")) {
        const json& w = j.at("wege");
        for (auto it = w.begin(); it != w.end(); ++it)
            if (!kWegeKeys.count(it.key()))
                throw flair::config_error("unknown config key 'wege." + it.key() + "'");
        if (!o.wege_mode.has_value() && w.contains("enabled") && !w.at("enabled").get<bool>())
            o.wege_mode = "none";
        if (!o.wege_mode.has_value() && w.contains("filter"))
            o.wege_mode = w.at("filter").get<std::string>();
        std::optional<int> r;
        take(w, "r", r);
        if (!o.wege_r.has_value()) o.wege_r = r;
        std::optional<double> reg, ss, rs;
        take(w, "reg", reg);
        take(w, "spatial_sigma", ss);
        take(w, "range_sigma", rs);
        if (!o.wege_reg.has_value()) o.wege_reg = reg;
        if (!o.wege_spatial_sigma.has_value()) o.wege_spatial_sigma = ss;
        if (!o.wege_range_sigma.has_value()) o.wege_range_sigma = rs;
    }
}

struct Resolved {
    flair::TrainConfig train;
    std::string task, out_dir;
    std::string image, grid, model_path;
    bool dump_wege = false;
    std::vector<std::string> activations;
    int row = -1, window = 256, hop = 64;
    int ntk_inputs = 128, ntk_neurons = 1024, ntk_seeds = 32;
    int samples = 8192;
    double halfwidth = 16.0;
    json echo;
};

Resolved resolve(const Options& o) {
    Resolved r;
    r.task = o.task;
    if (o.wavelet && *o.wavelet != "haar")
        throw flair::config_error("wavelet '" + *o.wavelet +
                                  "' is reserved but unimplemented; only 'haar' is available");
    if (!o.out_dir || o.out_dir->empty())
        throw flair::config_error("missing --out-dir (or config key out_dir)");
    r.out_dir = *o.out_dir;

    flair::TrainConfig& t = r.train;
    if (!o.activations.empty()) t.activation = flair::activation_from_name(o.activations.front());
    r.activations = o.activations;
    if (o.iters) t.iterations = *o.iters;
    if (o.lr) t.lr = *o.lr;
    if (o.seed) t.seed = *o.seed;
    if (o.hidden_layers) t.hidden_layers = *o.hidden_layers;
    if (o.hidden_width) t.hidden_width = *o.hidden_width;
    if (o.pe_bands) t.pe_bands = *o.pe_bands;
    if (o.batch_size) t.batch_size = *o.batch_size;
    if (o.log_every) t.log_every = *o.log_every;
    if (o.omega0) t.omega0 = *o.omega0;
    if (o.t_init) t.t_init = *o.t_init;
    if (o.sigma_init) t.sigma_init = *o.sigma_init;
    if (o.zeta_init) t.zeta_init = *o.zeta_init;
    if (o.scale) t.scale = *o.scale;
    if (o.poisson_level) t.poisson_level = *o.poisson_level;
    if (o.gaussian_sigma) t.gaussian_sigma = *o.gaussian_sigma;

    if (o.wege_mode) {
        const std::string& m = *o.wege_mode;
        if (m == "none") {
            t.wege.enabled = false;
        } else if (m == "guided" || m == "bilateral") {
            t.wege.enabled = true;
            t.wege.filter = m == "guided" ? flair::ScoreFilter::Guided
                                          : flair::ScoreFilter::Bilateral;
        } else {
            throw flair::config_error("--wege must be one of guided|bilateral|none");
        }
    }
    if (o.wege_r) t.wege.radius = *o.wege_r;
    if (o.wege_reg) t.wege.reg = *o.wege_reg;
    if (o.wege_spatial_sigma) t.wege.spatial_sigma = *o.wege_spatial_sigma;
    if (o.wege_range_sigma) t.wege.range_sigma = *o.wege_range_sigma;
    if (o.dump_wege) r.dump_wege = *o.dump_wege;

    if (o.image) r.image = *o.image;
    if (o.grid) r.grid = *o.grid;
    if (o.model_path) r.model_path = *o.model_path;
    if (o.row) r.row = *o.row;
    if (o.window) r.window = *o.window;
    if (o.hop) r.hop = *o.hop;
    if (o.ntk_inputs) r.ntk_inputs = *o.ntk_inputs;
    if (o.ntk_neurons) r.ntk_neurons = *o.ntk_neurons;
    if (o.ntk_seeds) r.ntk_seeds = *o.ntk_seeds;
    if (o.samples) r.samples = *o.samples;
    if (o.halfwidth) r.halfwidth = *o.halfwidth;

    r.echo = flair::train_config_to_json(t);
    r.echo["schema"] = 1;
    r.echo["task"] = r.task;
    r.echo["out_dir"] = r.out_dir;
    r.echo["wavelet"] = "haar";
    if (!r.image.empty()) r.echo["image"] = r.image;
    if (!r.grid.empty()) r.echo["grid"] = r.grid;
    if (!r.model_path.empty()) r.echo["model"] = r.model_path;
    if (r.task == "sr") r.echo["scale"] = t.scale;
    if (r.task == "denoise") {
        r.echo["poisson_level"] = t.poisson_level;
        r.echo["gaussian_sigma"] = t.gaussian_sigma;
    }
    if (r.task == "fit" || r.task == "sr" || r.task == "denoise")
        r.echo["dump_wege"] = r.dump_wege;
    if (r.task == "analyze-stft") {
        r.echo["row"] = r.row;
        r.echo["window"] = r.window;
        r.echo["hop"] = r.hop;
    }
    if (r.task == "analyze-ntk") {
        r.echo["ntk_inputs"] = r.ntk_inputs;
        r.echo["ntk_neurons"] = r.ntk_neurons;
        r.echo["ntk_seeds"] = r.ntk_seeds;
    }
    if (r.task == "analyze-basis") {
        r.echo["samples"] = r.samples;
        r.echo["halfwidth"] = r.halfwidth;
    }
    return r;
}

flair::Image require_image(const std::string& path) {
    if (path.empty()) throw flair::config_error("missing --image");
    if (!std::filesystem::exists(path))
        throw flair::config_error("input file not found: " + path);
    return flair::load_image(path);
}

flair::ActivationSpec spec_for_analysis(flair::ActivationKind kind, const Resolved& r) {
    flair::ActivationSpec s = flair::init_activation(flair::TaskFamily::Fitting, 0);
    s.kind = kind;
    s.learnable = false;
    s.omega0 = r.train.omega0 > 0.0 ? r.train.omega0 : flair::default_omega0(kind);
    if (!std::isnan(r.train.t_init)) s.T = r.train.t_init;
    if (!std::isnan(r.train.sigma_init)) s.sigma = r.train.sigma_init;
    if (!std::isnan(r.train.zeta_init)) s.zeta = r.train.zeta_init;
    return s;
}

void write_analysis_report(const Resolved& r, const std::map<std::string, std::string>& outputs) {
    flair::TaskReport rep;
    rep.task = r.task;
    rep.seed = r.train.seed;
    rep.config_echo = r.echo;
    rep.outputs = outputs;
    rep.write(r.out_dir);
}

int run_task(const Resolved& r) {
    flair::OutputOptions out;
    out.out_dir = r.out_dir;
    out.dump_wege = r.dump_wege;
    flair::TaskReport rep;

    if (r.task == "fit") {
        rep = flair::fit_image(require_image(r.image), r.train, out);
    } else if (r.task == "sr") {
        const flair::Image hr = require_image(r.image);
        const double scale = r.train.scale;
        if (scale < 1.0) throw flair::config_error("--scale must be >= 1");
        flair::Image lr;
        const long int_scale = std::lround(scale);
        if (std::fabs(scale - int_scale) < 1e-12 && hr.h % int_scale == 0 &&
            hr.w % int_scale == 0)
            lr = flair::box_downsample(hr, static_cast<int>(int_scale));
        else
            lr = flair::bicubic_resize(hr, static_cast<int>(std::lround(hr.h / scale)),
                                       static_cast<int>(std::lround(hr.w / scale)));
        rep = flair::super_resolve(lr, hr, scale, r.train, out);
    } else if (r.task == "denoise") {
        const flair::Image clean = require_image(r.image);
        const flair::Image noisy =
            flair::add_noise(clean, r.train.poisson_level, r.train.gaussian_sigma, r.train.seed);
        rep = flair::denoise(noisy, clean, r.train, out);
    } else if (r.task == "occupancy") {
        if (r.grid.empty()) throw flair::config_error("missing --grid");
        if (!std::filesystem::exists(r.grid))
            throw flair::config_error("input file not found: " + r.grid);
        rep = flair::fit_occupancy(flair::load_occupancy(r.grid), r.train, out);
    } else {
        throw flair::config_error("unknown task " + r.task);
    }

    rep.config_echo = r.echo;
    rep.write(r.out_dir, r.train.log_every);
    std::cout << rep.to_json()["metrics"].dump() << "\n";
    return rep.diverged ? 3 : 0;
}

int run_analysis(const Resolved& r) {
    std::filesystem::create_directories(r.out_dir);
    std::map<std::string, std::string> outputs;

    if (r.task == "analyze-ntk") {
        std::vector<std::string> names = r.activations;
        if (names.empty()) names = {"rc-gauss"};
        for (const std::string& name : names) {
            const auto spec = spec_for_analysis(flair::activation_from_name(name), r);
            const auto ks =
                flair::empirical_ntk(spec, r.ntk_inputs, r.ntk_neurons, r.ntk_seeds, r.train.seed);
            const std::string path = r.out_dir + "/ntk_eigs_" + name + ".csv";
            flair::write_ntk_csv(path, ks);
            outputs["ntk_eigs_" + name] = path;
            std::cout << name << ": lambda_max=" << ks.eigenvalues.front() << "\n";
        }
    } else if (r.task == "analyze-stft") {
        const flair::Image img = require_image(r.image);
        const int row = r.row >= 0 ? r.row : img.h / 2;
        const auto sg = flair::stft_line(img, row, r.window, r.hop);
        flair::write_stft_csv(r.out_dir + "/stft.csv", sg);
        flair::save_spectrogram_png(r.out_dir + "/stft.png", sg);
        outputs["stft_csv"] = r.out_dir + "/stft.csv";
        outputs["stft_png"] = r.out_dir + "/stft.png";
        std::cout << "frames=" << sg.frames << " bins=" << sg.bins << "\n";
    } else if (r.task == "analyze-basis") {
        std::vector<std::string> names = r.activations;
        if (names.empty()) names = {"rc-gauss", "gaussian"};
        const std::string upath = r.out_dir + "/uncertainty.csv";
        std::ofstream os(upath);
        os.precision(17);
        os << "activation,sigma_t,sigma_f,product,lower_bound\n";
        for (const std::string& name : names) {
            const auto spec = spec_for_analysis(flair::activation_from_name(name), r);
            const auto u = flair::uncertainty_product(spec, r.halfwidth, r.samples);
            os << name << "," << u.sigma_t << "," << u.sigma_f << "," << u.product << ","
               << 1.0 / (4.0 * M_PI) << "\n";
            std::cout << name << ": sigma_t*sigma_f=" << u.product << "\n";
            const std::string bpath = r.out_dir + "/basis_" + name + ".csv";
            std::ofstream bs(bpath);
            bs.precision(17);
            bs << "x,value\n";
            const int n = 2048;
            for (int i = 0; i < n; ++i) {
                const double x = -r.halfwidth + (i + 0.5) * 2.0 * r.halfwidth / n;
                bs << x << "," << flair::activation_value(x, spec) << "\n";
            }
            outputs["basis_" + name] = bpath;
        }
        outputs["uncertainty_csv"] = upath;
        if (!r.model_path.empty()) {
            if (!std::filesystem::exists(r.model_path))
                throw flair::config_error("input file not found: " + r.model_path);
            const flair::InrModel model = flair::InrModel::load(r.model_path);
            const int grid_n = 64;
            const auto spectra = flair::neuron_fft(model, 1, grid_n);
            const std::string mpath = r.out_dir + "/neuron_fft.png";
            flair::save_neuron_fft_montage(mpath, spectra, grid_n);
            outputs["neuron_fft"] = mpath;
        }
    } else {
        throw flair::config_error("unknown task " + r.task);
    }
    write_analysis_report(r, outputs);
    return 0;
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--out-dir", o.out_dir, "output directory");
    cmd->add_option("--activation", o.activations,
                    "activation name (rc-gauss|sine|finer|gaussian|relu-pe|rc-only|sinc-only)");
    cmd->add_option("--iters", o.iters, "training iterations");
    cmd->add_option("--lr", o.lr, "Adam learning rate");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--hidden-layers", o.hidden_layers, "hidden layer count (default 4)");
    cmd->add_option("--hidden-width", o.hidden_width, "hidden width (default 256)");
    cmd->add_option("--pe-bands", o.pe_bands, "positional-encoding bands for relu-pe");
    cmd->add_option("--batch-size", o.batch_size, "minibatch size (0 = full batch)");
    cmd->add_option("--log-every", o.log_every, "loss.csv stride");
    cmd->add_option("--omega0", o.omega0, "frequency scale for sine-family baselines");
    cmd->add_option("--t-init", o.t_init, "initial bandlimit T");
    cmd->add_option("--sigma-init", o.sigma_init, "initial envelope sigma");
    cmd->add_option("--zeta-init", o.zeta_init, "initial modulation frequency zeta");
    cmd->add_option("--wege", o.wege_mode, "WEGE score filter: guided|bilateral|none");
    cmd->add_option("--wege-r", o.wege_r, "guided filter radius");
    cmd->add_option("--wege-reg", o.wege_reg, "guided filter regularization");
    cmd->add_option("--wege-spatial-sigma", o.wege_spatial_sigma, "bilateral spatial sigma");
    cmd->add_option("--wege-range-sigma", o.wege_range_sigma, "bilateral range sigma");
    cmd->add_flag("--dump-wege", [&o](int64_t) { o.dump_wege = true; },
                  "dump raw/normalized/filtered energy maps");
    cmd->add_option("--wavelet", o.wavelet, "wavelet family (only 'haar')");
}

}  // namespace

int main(int argc, char** argv) {
    flair::apply_thread_cap();
    CLI::App app{"Band-limited coordinate-network toolkit (RC-GAUSS + WEGE)"};
    app.require_subcommand(1);

    Options o;
    auto* fit = app.add_subcommand("fit", "fit an image");
    auto* sr = app.add_subcommand("sr", "arbitrary-scale super-resolution");
    auto* dn = app.add_subcommand("denoise", "Poisson+Gaussian denoising");
    auto* occ = app.add_subcommand("occupancy", "fit a 3D occupancy grid");
    auto* antk = app.add_subcommand("analyze-ntk", "empirical NTK eigenspectra");
    auto* astft = app.add_subcommand("analyze-stft", "scan-line spectrogram");
    auto* abasis = app.add_subcommand("analyze-basis", "basis uncertainty / neuron FFT");
    for (CLI::App* cmd : {fit, sr, dn, occ, antk, astft, abasis}) add_common(cmd, o);
    for (CLI::App* cmd : {fit, sr, dn, astft}) cmd->add_option("--image", o.image, "input image");
    occ->add_option("--grid", o.grid, "OCC1 occupancy grid");
    sr->add_option("--scale", o.scale, "upsampling factor");
    dn->add_option("--poisson-level", o.poisson_level, "Poisson photon level (default 30)");
    dn->add_option("--gaussian-sigma", o.gaussian_sigma, "Gaussian count noise sigma (default 2)");
    astft->add_option("--row", o.row, "scan-line row (default height/2)");
    astft->add_option("--window", o.window, "window length (default 256)");
    astft->add_option("--hop", o.hop, "hop size (default 64)");
    antk->add_option("--ntk-inputs", o.ntk_inputs, "grid points (default 128)");
    antk->add_option("--ntk-neurons", o.ntk_neurons, "neurons (default 1024)");
    antk->add_option("--ntk-seeds", o.ntk_seeds, "Monte-Carlo seeds (default 32)");
    abasis->add_option("--model", o.model_path, "trained FLR1 model for neuron FFT");
    abasis->add_option("--halfwidth", o.halfwidth, "basis domain halfwidth (default 16)");
    abasis->add_option("--samples", o.samples, "basis samples (default 8192)");

    try {
        app.parse(argc, argv);
        o.task = app.get_subcommands().front()->get_name();
        if (!o.config_path.empty()) {
            if (!std::filesystem::exists(o.config_path))
                throw flair::config_error("input file not found: " + o.config_path);
            std::ifstream is(o.config_path);
            json j;
            is >> j;
            merge_config(o, j);
        }
        const Resolved r = resolve(o);
        if (r.task.rfind("analyze-", 0) == 0) return run_analysis(r);
        return run_task(r);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const flair::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const flair::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const flair::contract_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const flair::divergence_error& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return 3;
    } catch (const flair::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

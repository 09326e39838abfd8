#include "tempogan/cli.hpp"

#include "tempogan/ablation.hpp"
#include "tempogan/augment.hpp"
#include "tempogan/config.hpp"
#include "tempogan/field_io.hpp"
#include "tempogan/infer.hpp"
#include "tempogan/plot.hpp"
#include "tempogan/sim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

namespace tempogan {

namespace fs = std::filesystem;

namespace {

// Relative paths resolve against TEMPOGAN_DATA_DIR when it is set.
std::string data_path(const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    const char* root = std::getenv("TEMPOGAN_DATA_DIR");
    if (!root || !*root || fs::exists(p)) return p;
    return (fs::path(root) / p).string();
}

int cmd_gen_data(int sims, int frames, int res, int scale, uint64_t seed, std::string out) {
    DatasetOptions opts;
    opts.n_sims = sims;
    opts.frames = frames;
    opts.hi_shape = {res, res};
    opts.scale = scale;
    opts.seed = seed;
    opts.out_dir = data_path(out);
    DatasetManifest m = generate_dataset(opts);
    std::size_t kept = 0;
    for (const auto& s : m.sims) kept += s.frames.size();
    std::cout << "wrote " << kept << "/" << m.frames_total << " frames to " << opts.out_dir
              << " (mean lo density " << m.mean_density_lo << ")\n";
    return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& config_path,
              const std::vector<std::string>& overrides, std::string out) {
    DatasetManifest manifest = load_manifest(data_path(manifest_path));
    RunConfig rc = config_path.empty() ? parse_run_config("{}", overrides)
                                       : load_run_config(data_path(config_path), overrides);
    Trainer trainer(manifest, rc.train, rc.weights, rc.gen, data_path(out));
    TrainResult result = trainer.run();
    std::cout << "checkpoint: " << result.checkpoint_path << "\nmetrics: " << result.metrics_path
              << "\n";
    return 0;
}

std::vector<std::pair<int, std::string>> list_input_frames(const std::string& dir) {
    // accepts frame_XXXX_x_density.tgf pairs (gen-data layout) or
    // frame_XXXX_density.tgf
    std::vector<std::pair<int, std::string>> frames;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        const auto pos = name.find("density.tgf");
        if (pos == std::string::npos || name.find("y_density") != std::string::npos) continue;
        // extract the number after "frame_"
        const auto fpos = name.find("frame_");
        if (fpos == std::string::npos) continue;
        int idx = std::atoi(name.c_str() + fpos + 6);
        frames.push_back({idx, entry.path().string()});
    }
    std::sort(frames.begin(), frames.end());
    return frames;
}

std::string velocity_for(const std::string& density_path) {
    std::string v = density_path;
    const auto pos = v.rfind("density.tgf");
    v.replace(pos, std::string("density.tgf").size(), "velocity.tgf");
    return v;
}

int cmd_infer(const std::string& checkpoint, const std::string& in_dir, const std::string& out_dir,
              int tile, int overlap, double vel_scale, bool vel_zero, int recursive) {
    ModelBundle model = load_model(data_path(checkpoint));
    fs::create_directories(out_dir);
    auto frames = list_input_frames(data_path(in_dir));
    if (frames.empty()) throw std::runtime_error("infer: no density frames in " + in_dir);

    for (const auto& [idx, rho_path] : frames) {
        InferBundle x{read_tgf(rho_path), read_tgf(velocity_for(rho_path))};
        if (vel_zero)
            x = modify_velocity(x, {VelocityControl::Kind::zero, 0.0, {}});
        else if (vel_scale != 1.0)
            x = modify_velocity(x, {VelocityControl::Kind::scale, vel_scale, {}});

        GridField out;
        if (recursive > 1) {
            RecursiveOptions opts;
            opts.times = recursive;
            if (tile > 0) opts.plan = make_tile_plan(x.rho.shape(), tile, overlap);
            out = infer_recursive(model.g, model.train.fields, x, opts);
        } else if (tile > 0) {
            out = infer_tiled(model.g, model.train.fields, x,
                              make_tile_plan(x.rho.shape(), tile, overlap));
        } else {
            out = infer_full(model.g, model.train.fields, x);
        }
        char name[64];
        std::snprintf(name, sizeof name, "frame_%04d_out_density.tgf", idx);
        write_tgf(out, (fs::path(out_dir) / name).string());
    }
    std::cout << "wrote " << frames.size() << " frames to " << out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& manifest_path,
             const std::string& suite_path, const std::string& out_dir) {
    if (!suite_path.empty()) {
        DatasetManifest manifest = load_manifest(data_path(manifest_path));
        AblationSuite suite = load_suite(data_path(suite_path));
        AblationReport report =
            run_suite(manifest, suite, out_dir.empty() ? std::string("ablation") : out_dir);
        for (const auto& r : report.rows)
            std::cout << r.name << (r.ok ? "" : " FAILED: " + r.error)
                      << " temporal_advected=" << r.temporal_advected << " raw=" << r.temporal_raw
                      << " psnr=" << r.psnr << " grad=" << r.grad_mag << " mass=" << r.mass << "\n";
        return report.complete ? 0 : 1;
    }
    DatasetManifest manifest = load_manifest(data_path(manifest_path));
    ModelBundle model = load_model(data_path(checkpoint));
    AblationRow row = evaluate_model(model, manifest, "test");
    std::cout << "temporal_advected," << row.temporal_advected << "\n"
              << "temporal_raw," << row.temporal_raw << "\n"
              << "psnr," << row.psnr << "\n"
              << "grad_mag," << row.grad_mag << "\n"
              << "mass," << row.mass << "\n"
              << "ds_real," << row.ds_real << "\n"
              << "ds_fake," << row.ds_fake << "\n";
    return 0;
}

int cmd_augment_preview(const std::string& in_file, uint64_t seed, const std::string& out_dir) {
    GridField f = read_tgf(data_path(in_file));
    fs::create_directories(out_dir);
    Rng rng = Rng::substream(seed, 0xa7e11ull, 0);
    std::vector<int> tile(size_t(f.dim()), std::max(4, f.shape(0) / 2));
    AugmentationTransform t = sample_transform(rng, tile, f.shape(), 1);
    GridField before = apply_passive(f, make_transform(tile, f.shape(), 1.0, 0.0,
                                                       {false, false, false}, 1),
                                     1);
    GridField after = f.channels() == f.dim() ? apply_directional(f, t, 1) : apply_passive(f, t, 1);
    write_tgf(before, (fs::path(out_dir) / "before.tgf").string());
    write_tgf(after, (fs::path(out_dir) / "after.tgf").string());
    std::cout << "scale=" << t.scale << " theta=" << t.theta_deg << " flip=" << t.flip[0]
              << t.flip[1] << "\n";
    return 0;
}

int cmd_plot(const std::string& metrics, const std::string& out_dir) {
    auto files = plot_metrics(data_path(metrics), out_dir);
    std::cout << "wrote " << files.size() << " charts to " << out_dir << "\n";
    return 0;
}

} // namespace

int cli_dispatch(const std::vector<std::string>& args) {
    CLI::App app{"tempoGAN: temporally coherent super-resolution for smoke flows"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a randomized smoke dataset");
    int sims = 4, frames = 60, res = 128, scale = 4;
    uint64_t seed = 1;
    std::string out = "dataset";
    gen->add_option("--sims", sims, "number of simulations")->capture_default_str();
    gen->add_option("--frames", frames, "frames per simulation")->capture_default_str();
    gen->add_option("--res", res, "high-res grid edge length")->capture_default_str();
    gen->add_option("--scale", scale, "down-sampling factor for the inputs")->capture_default_str();
    gen->add_option("--seed", seed, "rng seed")->capture_default_str();
    gen->add_option("--out", out, "output directory")->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "train the GAN on a dataset");
    std::string manifest_path, config_path, train_out = "run";
    std::vector<std::string> overrides;
    train->add_option("--manifest", manifest_path, "dataset manifest.json")->required();
    train->add_option("--config", config_path, "JSON run configuration");
    train->add_option("--set", overrides, "override config keys (section.key=value)");
    train->add_option("--out", train_out, "run output directory")->capture_default_str();

    // infer
    auto* infer = app.add_subcommand("infer", "apply a trained generator to input frames");
    std::string ckpt, in_dir, infer_out = "out";
    int tile = 0, overlap = 3, recursive = 1;
    double vel_scale = 1.0;
    bool vel_zero = false;
    infer->add_option("--checkpoint", ckpt, "checkpoint file")->required();
    infer->add_option("--in", in_dir, "directory with frame_*_density/velocity.tgf")->required();
    infer->add_option("--out", infer_out, "output directory")->capture_default_str();
    infer->add_option("--tile", tile, "tile core size in low-res cells (0 = whole frame)")
        ->capture_default_str();
    infer->add_option("--overlap", overlap, "tile overlap in low-res cells")->capture_default_str();
    auto* vs = infer->add_option("--vel-scale", vel_scale, "scale velocity inputs")
                   ->capture_default_str();
    auto* vz = infer->add_flag("--vel-zero", vel_zero, "zero all velocity inputs");
    vs->excludes(vz);
    infer->add_option("--recursive", recursive, "apply the generator repeatedly")
        ->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or run an ablation suite");
    std::string eval_ckpt, eval_manifest, suite_path, eval_out;
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint file");
    eval->add_option("--manifest", eval_manifest, "dataset manifest.json")->required();
    eval->add_option("--suite", suite_path, "ablation suite JSON");
    eval->add_option("--out", eval_out, "report directory (suite mode)");

    // augment-preview
    auto* prev = app.add_subcommand("augment-preview", "write before/after augmentation tiles");
    std::string prev_in, prev_out = "preview";
    uint64_t prev_seed = 1;
    prev->add_option("--in", prev_in, "TGF1 field")->required();
    prev->add_option("--seed", prev_seed, "rng seed")->capture_default_str();
    prev->add_option("--out", prev_out, "output directory")->capture_default_str();

    // plot
    auto* plot = app.add_subcommand("plot", "render loss curves from a metrics file");
    std::string metrics_path, plot_out = "plots";
    plot->add_option("--metrics", metrics_path, "metrics.csv from a training run")->required();
    plot->add_option("--out", plot_out, "output directory")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the usage diagnostic
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(sims, frames, res, scale, seed, out);
        if (train->parsed()) return cmd_train(manifest_path, config_path, overrides, train_out);
        if (infer->parsed())
            return cmd_infer(ckpt, in_dir, infer_out, tile, overlap, vel_scale, vel_zero,
                             recursive);
        if (eval->parsed()) return cmd_eval(eval_ckpt, eval_manifest, suite_path, eval_out);
        if (prev->parsed()) return cmd_augment_preview(prev_in, prev_seed, prev_out);
        if (plot->parsed()) return cmd_plot(metrics_path, plot_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace tempogan

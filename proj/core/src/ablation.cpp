#include "tempogan/ablation.hpp"

#include "tempogan/field_io.hpp"
#include "tempogan/infer.hpp"
#include "tempogan/sim.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace tempogan {

using nlohmann::json;
namespace fs = std::filesystem;

AblationSuite load_suite(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("suite: cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("suite: parse error: ") + e.what());
    }
    AblationSuite suite;
    if (j.contains("base")) suite.base = parse_run_config(j["base"].dump());
    for (const auto& jr : j.at("runs")) {
        for (auto it = jr.begin(); it != jr.end(); ++it) {
            const std::string k = it.key();
            if (k != "name" && k != "temporal_mode" && k != "input_fields" && k != "lambda_f" &&
                k != "use_gan")
                throw std::runtime_error("suite: unknown run key '" + k + "'");
        }
        AblationRun run;
        run.name = jr.at("name").get<std::string>();
        if (jr.contains("temporal_mode"))
            run.temporal = temporal_mode_from_string(jr["temporal_mode"].get<std::string>());
        if (jr.contains("input_fields"))
            run.fields = input_fields_from_string(jr["input_fields"].get<std::string>());
        if (jr.contains("lambda_f")) {
            auto v = jr["lambda_f"].get<std::vector<double>>();
            if (v.size() != 4) throw std::runtime_error("suite: lambda_f needs 4 entries");
            for (int i = 0; i < 4; ++i) run.lambda_f[size_t(i)] = v[size_t(i)];
        }
        if (jr.contains("use_gan")) run.use_gan = jr["use_gan"].get<bool>();
        suite.runs.push_back(std::move(run));
    }
    return suite;
}

AblationRow evaluate_model(ModelBundle& model, const DatasetManifest& manifest,
                           const std::string& split, int max_frames) {
    AblationRow row;
    auto sims = manifest.split_sims(split);
    if (sims.empty()) throw std::runtime_error("evaluate_model: split '" + split + "' empty");
    const SimEntry* sim = sims.front();
    const int n = std::min<int>(max_frames, int(sim->frames.size()));
    if (n < 2) throw std::runtime_error("evaluate_model: need at least two frames");

    std::vector<GridField> outputs, vxs;
    double psnr_acc = 0.0, grad_acc = 0.0, mass_acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const FrameEntry& fe = sim->frames[size_t(i)];
        InferBundle x{read_tgf(manifest.resolve(fe.x_density)),
                      read_tgf(manifest.resolve(fe.x_velocity))};
        GridField y = read_tgf(manifest.resolve(fe.y_density));
        GridField out = infer_full(model.g, model.train.fields, x);
        psnr_acc += psnr(out, y);
        grad_acc += mean_gradient_magnitude(out);
        mass_acc += total_mass(out);
        vxs.push_back(std::move(x.vel));
        outputs.push_back(std::move(out));
    }
    TemporalMetrics tm = temporal_metric(outputs, vxs, manifest.scale);
    double adv = 0.0, raw = 0.0;
    for (double v : tm.advected) adv += v;
    for (double v : tm.raw) raw += v;
    row.temporal_advected = adv / double(tm.advected.size());
    row.temporal_raw = raw / double(tm.raw.size());
    row.psnr = psnr_acc / n;
    row.grad_mag = grad_acc / n;
    row.mass = mass_acc / n;

    BalanceReport balance = eval_discriminator_balance(model, manifest, split, 4,
                                                       model.train.batch_size,
                                                       model.train.tile_lo, model.train.seed);
    row.ds_real = balance.ds_real;
    row.ds_fake = balance.ds_fake;
    row.ok = true;
    return row;
}

AblationReport run_suite(const DatasetManifest& manifest, const AblationSuite& suite,
                         const std::string& out_dir) {
    AblationReport report;
    fs::create_directories(out_dir);
    for (const AblationRun& run : suite.runs) {
        AblationRow row;
        row.name = run.name;
        try {
            RunConfig rc = suite.base;
            rc.weights.temporal = run.temporal;
            rc.weights.lambda_f = run.lambda_f;
            rc.train.fields = run.fields;
            rc.gen.in_channels = input_channel_count(run.fields, rc.gen.rank);
            if (!run.use_gan) {
                rc.weights.adversarial = false;
                rc.weights.temporal = TemporalMode::none;
            }
            const std::string run_dir = (fs::path(out_dir) / run.name).string();
            Trainer trainer(manifest, rc.train, rc.weights, rc.gen, run_dir);
            trainer.run();
            row = evaluate_model(trainer.model(), manifest, "test");
            row.name = run.name;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            report.complete = false;
        }
        report.rows.push_back(std::move(row));
    }
    write_report(report, (fs::path(out_dir) / "report.json").string());
    // flat table for quick reading
    std::ofstream os((fs::path(out_dir) / "report.csv").string(), std::ios::trunc);
    os << "name,ok,temporal_advected,temporal_raw,psnr,grad_mag,mass,ds_real,ds_fake\n";
    for (const auto& r : report.rows)
        os << r.name << "," << (r.ok ? 1 : 0) << "," << r.temporal_advected << "," << r.temporal_raw
           << "," << r.psnr << "," << r.grad_mag << "," << r.mass << "," << r.ds_real << ","
           << r.ds_fake << "\n";
    return report;
}

void write_report(const AblationReport& report, const std::string& path) {
    json j;
    j["complete"] = report.complete;
    j["rows"] = json::array();
    for (const auto& r : report.rows)
        j["rows"].push_back({{"name", r.name},
                             {"ok", r.ok},
                             {"error", r.error},
                             {"temporal_advected", r.temporal_advected},
                             {"temporal_raw", r.temporal_raw},
                             {"psnr", r.psnr},
                             {"grad_mag", r.grad_mag},
                             {"mass", r.mass},
                             {"ds_real", r.ds_real},
                             {"ds_fake", r.ds_fake}});
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("report: cannot write " + path);
    os << j.dump(1) << "\n";
}

} // namespace tempogan

#include "tempogan/config.hpp"

#include "tempogan/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>

namespace tempogan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json weights_to_json(const LossWeights& w) {
    return {{"lambda_l1", w.lambda_l1},
            {"lambda_f", w.lambda_f},
            {"temporal_mode", to_string(w.temporal)},
            {"l2t_double_sided", w.l2t_double_sided},
            {"lambda_l2t", w.lambda_l2t},
            {"adversarial", w.adversarial}};
}

json train_to_json(const TrainConfig& t) {
    return {{"iterations", t.iterations},
            {"batch_size", t.batch_size},
            {"k_ds", t.k_ds},
            {"k_dt", t.k_dt},
            {"k_g", t.k_g},
            {"lr", t.lr},
            {"adam_beta1", t.adam_beta1},
            {"adam_beta2", t.adam_beta2},
            {"adam_eps", t.adam_eps},
            {"seed", t.seed},
            {"checkpoint_every", t.checkpoint_every},
            {"tile_lo", t.tile_lo},
            {"augment", t.augment},
            {"input_fields", to_string(t.fields)}};
}

json gen_to_json(const GeneratorConfig& g) {
    json blocks = json::array();
    for (const auto& b : g.blocks) blocks.push_back({b[0], b[1]});
    return {{"rank", g.rank},
            {"in_channels", g.in_channels},
            {"upsample", g.upsample},
            {"kernel", g.kernel},
            {"blocks", blocks},
            {"batch_norm", g.batch_norm},
            {"bn_eps", g.bn_eps},
            {"bn_momentum", g.bn_momentum},
            {"init_std", g.init_std}};
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

void parse_weights(const json& j, LossWeights& w) {
    reject_unknown(j,
                   {"lambda_l1", "lambda_f", "temporal_mode", "l2t_double_sided", "lambda_l2t",
                    "adversarial"},
                   "weights");
    if (j.contains("adversarial")) w.adversarial = j["adversarial"].get<bool>();
    if (j.contains("lambda_l1")) w.lambda_l1 = j["lambda_l1"].get<double>();
    if (j.contains("lambda_f")) {
        auto v = j["lambda_f"].get<std::vector<double>>();
        if (v.size() != 4) throw std::runtime_error("config: lambda_f needs 4 entries");
        for (int i = 0; i < 4; ++i) w.lambda_f[size_t(i)] = v[size_t(i)];
    }
    if (j.contains("temporal_mode"))
        w.temporal = temporal_mode_from_string(j["temporal_mode"].get<std::string>());
    if (j.contains("l2t_double_sided")) w.l2t_double_sided = j["l2t_double_sided"].get<bool>();
    if (j.contains("lambda_l2t")) w.lambda_l2t = j["lambda_l2t"].get<double>();
}

void parse_train(const json& j, TrainConfig& t) {
    reject_unknown(j,
                   {"iterations", "batch_size", "k_ds", "k_dt", "k_g", "lr", "adam_beta1",
                    "adam_beta2", "adam_eps", "seed", "checkpoint_every", "tile_lo", "augment",
                    "input_fields"},
                   "train");
    if (j.contains("iterations")) t.iterations = j["iterations"].get<int>();
    if (j.contains("batch_size")) t.batch_size = j["batch_size"].get<int>();
    if (j.contains("k_ds")) t.k_ds = j["k_ds"].get<int>();
    if (j.contains("k_dt")) t.k_dt = j["k_dt"].get<int>();
    if (j.contains("k_g")) t.k_g = j["k_g"].get<int>();
    if (j.contains("lr")) t.lr = j["lr"].get<double>();
    if (j.contains("adam_beta1")) t.adam_beta1 = j["adam_beta1"].get<double>();
    if (j.contains("adam_beta2")) t.adam_beta2 = j["adam_beta2"].get<double>();
    if (j.contains("adam_eps")) t.adam_eps = j["adam_eps"].get<double>();
    if (j.contains("seed")) t.seed = j["seed"].get<uint64_t>();
    if (j.contains("checkpoint_every")) t.checkpoint_every = j["checkpoint_every"].get<int>();
    if (j.contains("tile_lo")) t.tile_lo = j["tile_lo"].get<int>();
    if (j.contains("augment")) t.augment = j["augment"].get<bool>();
    if (j.contains("input_fields"))
        t.fields = input_fields_from_string(j["input_fields"].get<std::string>());
}

void parse_gen(const json& j, GeneratorConfig& g) {
    reject_unknown(j,
                   {"rank", "in_channels", "upsample", "kernel", "blocks", "batch_norm", "bn_eps",
                    "bn_momentum", "init_std"},
                   "generator");
    if (j.contains("rank")) g.rank = j["rank"].get<int>();
    if (j.contains("in_channels")) g.in_channels = j["in_channels"].get<int>();
    if (j.contains("upsample")) g.upsample = j["upsample"].get<int>();
    if (j.contains("kernel")) g.kernel = j["kernel"].get<int>();
    if (j.contains("blocks")) {
        g.blocks.clear();
        for (const auto& b : j["blocks"]) {
            auto v = b.get<std::vector<int>>();
            if (v.size() != 2) throw std::runtime_error("config: each block needs [ch_a, ch_b]");
            g.blocks.push_back({v[0], v[1]});
        }
    }
    if (j.contains("batch_norm")) g.batch_norm = j["batch_norm"].get<bool>();
    if (j.contains("bn_eps")) g.bn_eps = j["bn_eps"].get<double>();
    if (j.contains("bn_momentum")) g.bn_momentum = j["bn_momentum"].get<double>();
    if (j.contains("init_std")) g.init_std = j["init_std"].get<double>();
}

json run_config_to_json(const TrainConfig& t, const LossWeights& w, const GeneratorConfig& g) {
    return {{"train", train_to_json(t)}, {"weights", weights_to_json(w)}, {"generator", gen_to_json(g)}};
}

// "section.key=value" or "key=value" (searched across sections)
void apply_override(json& j, const std::string& ov) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
        throw std::runtime_error("config: override must be key=value, got '" + ov + "'");
    std::string key = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);
    std::string section;
    const auto dot = key.find('.');
    if (dot != std::string::npos) {
        section = key.substr(0, dot);
        key = key.substr(dot + 1);
    }
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value; // plain strings may be unquoted
    }
    std::vector<std::string> sections =
        section.empty() ? std::vector<std::string>{"train", "weights", "generator"}
                        : std::vector<std::string>{section};
    for (const std::string& s : sections) {
        if (!j.contains(s)) continue;
        if (j[s].contains(key) || section == s) {
            j[s][key] = parsed;
            return;
        }
    }
    throw std::runtime_error("config: override key '" + ov + "' matches no known setting");
}

} // namespace

RunConfig parse_run_config(const std::string& json_text, const std::vector<std::string>& overrides) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("config: parse error: ") + e.what());
    }
    reject_unknown(j, {"train", "weights", "generator"}, "top level");
    // defaults serialized first so overrides can target any key
    RunConfig rc;
    json full = run_config_to_json(rc.train, rc.weights, rc.gen);
    for (const std::string& section : {"train", "weights", "generator"})
        if (j.contains(section))
            for (auto it = j[section].begin(); it != j[section].end(); ++it)
                full[section][it.key()] = it.value();
    for (const std::string& ov : overrides) apply_override(full, ov);

    parse_train(full["train"], rc.train);
    parse_weights(full["weights"], rc.weights);
    parse_gen(full["generator"], rc.gen);
    rc.train.validate();
    // generator channel count follows the selected input fields
    rc.gen.in_channels = input_channel_count(rc.train.fields, rc.gen.rank);
    rc.gen.validate();
    return rc;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_run_config(text, overrides);
}

std::string model_config_to_json(const ModelBundle& model) {
    json j = run_config_to_json(model.train, model.weights, model.gen_cfg);
    j["ds"] = {{"in_channels", model.ds_cfg.in_channels}, {"input_size", model.ds_cfg.input_size}};
    j["dt"] = {{"in_channels", model.dt_cfg.in_channels}, {"input_size", model.dt_cfg.input_size}};
    return j.dump(1);
}

void write_model_config(const ModelBundle& model, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("config: cannot write " + path);
    os << model_config_to_json(model) << "\n";
}

ModelBundle load_model(const std::string& checkpoint_path) {
    const fs::path dir = fs::path(checkpoint_path).parent_path();
    const std::string cfg_path = (dir / "config.json").string();
    std::ifstream is(cfg_path);
    if (!is)
        throw std::runtime_error("load_model: missing config.json next to checkpoint: " + cfg_path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    json j = json::parse(text);

    RunConfig rc;
    parse_train(j.at("train"), rc.train);
    parse_weights(j.at("weights"), rc.weights);
    parse_gen(j.at("generator"), rc.gen);

    DiscriminatorConfig ds_cfg, dt_cfg;
    ds_cfg.rank = dt_cfg.rank = rc.gen.rank;
    ds_cfg.in_channels = j.at("ds").at("in_channels").get<int>();
    ds_cfg.input_size = j.at("ds").at("input_size").get<int>();
    dt_cfg.in_channels = j.at("dt").at("in_channels").get<int>();
    dt_cfg.input_size = j.at("dt").at("input_size").get<int>();

    ModelBundle model{rc.train,
                      rc.weights,
                      rc.gen,
                      ds_cfg,
                      dt_cfg,
                      Generator<float>(rc.gen, Rng(0)),
                      Discriminator<float>(ds_cfg, Rng(1)),
                      Discriminator<float>(dt_cfg, Rng(2)),
                      0};

    std::vector<StateView<float>> buffers;
    auto add_params = [&buffers](const std::string& prefix, std::vector<ParamView<float>> params) {
        for (auto& p : params) buffers.push_back({prefix + p.name, p.value});
    };
    auto add_state = [&buffers](const std::string& prefix, std::vector<StateView<float>> states) {
        for (auto& s : states) buffers.push_back({prefix + s.name, s.value});
    };
    add_params("", model.g.params());
    add_state("", model.g.state());
    add_params("ds.", model.ds.params());
    add_state("ds.", model.ds.state());
    add_params("dt.", model.dt.params());
    add_state("dt.", model.dt.state());
    // optimizer moments are restored only when resuming via Trainer; here we
    // accept and discard them
    std::vector<std::vector<float>> opt_sink;
    auto add_opt = [&](const std::string& prefix, std::vector<ParamView<float>> params) {
        for (auto& p : params) {
            opt_sink.emplace_back(p.value->size(), 0.0f);
            buffers.push_back({prefix + p.name + ".adam_m", &opt_sink.back()});
            opt_sink.emplace_back(p.value->size(), 0.0f);
            buffers.push_back({prefix + p.name + ".adam_v", &opt_sink.back()});
        }
    };
    // reserve to keep pointers stable
    opt_sink.reserve(2 * (model.g.params().size() + model.ds.params().size() + model.dt.params().size()));
    add_opt("opt.g.", model.g.params());
    add_opt("opt.ds.", model.ds.params());
    add_opt("opt.dt.", model.dt.params());
    std::vector<float> steps(3, 0.0f);
    buffers.push_back({"opt.steps", &steps});

    model.iteration = load_checkpoint(
        checkpoint_path, architecture_hash(model.gen_cfg, model.ds_cfg, model.dt_cfg), buffers);
    return model;
}

} // namespace tempogan

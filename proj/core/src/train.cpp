#include "tempogan/train.hpp"

#include "tempogan/checkpoint.hpp"
#include "tempogan/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace tempogan {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
    if (iterations < 0 || iterations % 2 != 0)
        throw std::runtime_error("TrainConfig: iterations must be even and >= 0");
    if (batch_size < 1) throw std::runtime_error("TrainConfig: batch_size must be >= 1");
    if (k_ds < 1 || k_dt < 1 || k_g < 1)
        throw std::runtime_error("TrainConfig: trainings per step must be >= 1");
    if (tile_lo < 1) throw std::runtime_error("TrainConfig: tile_lo must be >= 1");
}

double lr_schedule(int64_t iteration, const TrainConfig& cfg) {
    if (iteration < 0 || iteration >= cfg.iterations)
        throw std::runtime_error("lr_schedule: iteration out of range");
    return iteration < cfg.iterations / 2 ? cfg.lr : cfg.lr / 20.0;
}

uint64_t architecture_hash(const GeneratorConfig& g, const DiscriminatorConfig& ds,
                           const DiscriminatorConfig& dt) {
    std::ostringstream os;
    os << "g:" << g.rank << "," << g.in_channels << "," << g.upsample << "," << g.kernel << ","
       << g.batch_norm << ",";
    for (const auto& b : g.blocks) os << b[0] << "-" << b[1] << "|";
    for (const DiscriminatorConfig* d : {&ds, &dt}) {
        os << ";d:" << d->rank << "," << d->in_channels << "," << d->kernel << "," << d->input_size
           << ",";
        for (std::size_t i = 0; i < d->channels.size(); ++i)
            os << d->channels[i] << "/" << d->strides[i] << "|";
    }
    return fnv1a(os.str());
}

Tensor<float> advect_batch(const std::vector<AdvectionCoeffs>& coeffs, const Tensor<float>& t,
                           bool transpose) {
    Tensor<float> out(t.shape);
    const int N = t.n();
    const std::size_t plane = t.spatial();
#pragma omp parallel for schedule(static)
    for (int s = 0; s < N; ++s) {
        const AdvectionCoeffs& c = coeffs[size_t(s)];
        if (c.cells() != plane) throw std::runtime_error("advect_batch: coeff/tensor size mismatch");
        const int st = c.stencil();
        const float* src = t.sample(s);
        float* dst = out.sample(s);
        if (!transpose) {
            for (std::size_t i = 0; i < plane; ++i) {
                const auto& row = c.row(i);
                float acc = 0.0f;
                for (int k = 0; k < st; ++k) acc += row.weight[size_t(k)] * src[row.index[size_t(k)]];
                dst[i] = acc;
            }
        } else {
            for (std::size_t i = 0; i < plane; ++i) dst[i] = 0.0f;
            for (std::size_t i = 0; i < plane; ++i) {
                const auto& row = c.row(i);
                for (int k = 0; k < st; ++k) dst[row.index[size_t(k)]] += row.weight[size_t(k)] * src[i];
            }
        }
    }
    return out;
}

namespace {

std::vector<float> to_vec(const Tensor<float>& probs) {
    return probs.data;
}

double mean(const std::vector<float>& v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (float x : v) acc += double(x);
    return acc / double(v.size());
}

// d(-log p)/dz for each sample, averaged over the batch: (p - 1) / n
Tensor<float> dlogit_toward_one(const Tensor<float>& probs) {
    Tensor<float> d(probs.shape);
    const double n = double(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) d.data[i] = float((double(probs.data[i]) - 1.0) / n);
    return d;
}

// d(-log(1-p))/dz: p / n
Tensor<float> dlogit_toward_zero(const Tensor<float>& probs) {
    Tensor<float> d(probs.shape);
    const double n = double(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) d.data[i] = float(double(probs.data[i]) / n);
    return d;
}

} // namespace

Trainer::Trainer(const DatasetManifest& manifest, TrainConfig cfg, LossWeights weights,
                 GeneratorConfig gen_cfg, std::string out_dir)
    : sampler_(manifest, "train",
               BatchConfig{cfg.tile_lo, cfg.augment, cfg.fields, cfg.seed}),
      adam_g_(float(cfg.adam_beta1), float(cfg.adam_beta2), float(cfg.adam_eps)),
      adam_ds_(float(cfg.adam_beta1), float(cfg.adam_beta2), float(cfg.adam_eps)),
      adam_dt_(float(cfg.adam_beta1), float(cfg.adam_beta2), float(cfg.adam_eps)),
      out_dir_(std::move(out_dir)) {
    cfg.validate();
    const int rank = int(sampler_.lo_shape().size());
    if (gen_cfg.in_channels != input_channel_count(cfg.fields, rank))
        throw std::runtime_error("Trainer: generator in_channels does not match input fields");
    gen_cfg.rank = rank;

    DiscriminatorConfig ds_cfg, dt_cfg;
    ds_cfg.rank = dt_cfg.rank = rank;
    ds_cfg.in_channels = 2;
    dt_cfg.in_channels = 3;
    ds_cfg.input_size = dt_cfg.input_size = cfg.tile_lo * sampler_.scale();

    model_ = std::make_unique<ModelBundle>(ModelBundle{
        cfg, weights, gen_cfg, ds_cfg, dt_cfg,
        Generator<float>(gen_cfg, Rng::substream(cfg.seed, 0x6e47ull, 0)),
        Discriminator<float>(ds_cfg, Rng::substream(cfg.seed, 0x6e47ull, 1)),
        Discriminator<float>(dt_cfg, Rng::substream(cfg.seed, 0x6e47ull, 2)), 0});

    if (!out_dir_.empty()) {
        fs::create_directories(out_dir_);
        write_model_config(*model_, (fs::path(out_dir_) / "config.json").string());
    }
}

void Trainer::ds_update(double lr, IterationMetrics& m) {
    const TrainConfig& cfg = model_->train;
    PairBatch b = sampler_.pair_batch(batch_counter_++, cfg.batch_size);

    Generator<float>::Pass gp;
    Tensor<float> fake = model_->g.forward(b.x, gp, NetMode::train, false);

    Discriminator<float>::Pass preal, pfake;
    Tensor<float> real_probs = ds_forward(model_->ds, b.x_rho, b.y, preal, NetMode::train, true);
    Tensor<float> fake_probs = ds_forward(model_->ds, b.x_rho, fake, pfake, NetMode::train, true);

    m.loss_ds = double(d_loss(to_vec(real_probs), to_vec(fake_probs)));
    m.ds_real = mean(to_vec(real_probs));
    m.ds_fake = mean(to_vec(fake_probs));

    model_->ds.zero_grad();
    ds_backward(model_->ds, preal, dlogit_toward_one(real_probs), nullptr, true);
    ds_backward(model_->ds, pfake, dlogit_toward_zero(fake_probs), nullptr, true);
    adam_ds_.step(model_->ds.params(), float(lr));
}

void Trainer::dt_update(double lr, IterationMetrics& m) {
    const TrainConfig& cfg = model_->train;
    const bool aligned = model_->weights.temporal == TemporalMode::dt_aligned;
    TripletBatch tb = sampler_.triplet_batch(batch_counter_++, cfg.batch_size);

    Generator<float>::Pass gp0, gp1, gp2;
    Tensor<float> f_prev = model_->g.forward(tb.x_prev, gp0, NetMode::train, false);
    Tensor<float> f_mid = model_->g.forward(tb.center.x, gp1, NetMode::train, false);
    Tensor<float> f_next = model_->g.forward(tb.x_next, gp2, NetMode::train, false);

    Tensor<float> rp = aligned ? advect_batch(tb.coeffs_prev, tb.y_prev, false) : tb.y_prev;
    Tensor<float> rn = aligned ? advect_batch(tb.coeffs_next, tb.y_next, false) : tb.y_next;
    Tensor<float> fp = aligned ? advect_batch(tb.coeffs_prev, f_prev, false) : f_prev;
    Tensor<float> fn = aligned ? advect_batch(tb.coeffs_next, f_next, false) : f_next;

    Discriminator<float>::Pass preal, pfake;
    Tensor<float> real_probs =
        dt_forward(model_->dt, rp, tb.center.y, rn, preal, NetMode::train, true);
    Tensor<float> fake_probs = dt_forward(model_->dt, fp, f_mid, fn, pfake, NetMode::train, true);

    m.loss_dt = double(d_loss(to_vec(real_probs), to_vec(fake_probs)));
    m.dt_real = mean(to_vec(real_probs));
    m.dt_fake = mean(to_vec(fake_probs));

    model_->dt.zero_grad();
    dt_backward(model_->dt, preal, dlogit_toward_one(real_probs), true);
    dt_backward(model_->dt, pfake, dlogit_toward_zero(fake_probs), true);
    adam_dt_.step(model_->dt.params(), float(lr));
}

void Trainer::g_update(double lr, IterationMetrics& m) {
    const TrainConfig& cfg = model_->train;
    const LossWeights& w = model_->weights;

    if (!w.adversarial) {
        // plain L2 regression baseline
        PairBatch pb = sampler_.pair_batch(batch_counter_++, cfg.batch_size);
        model_->g.zero_grad();
        Generator<float>::Pass gp;
        Tensor<float> f = model_->g.forward(pb.x, gp, NetMode::train, true);
        Tensor<float> grad(f.shape);
        double val = 0.0;
        const double norm = 1.0 / double(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double d = double(f.data[i]) - double(pb.y.data[i]);
            val += d * d;
            grad.data[i] = float(2.0 * norm * d);
        }
        m.g.l1 = val * norm; // reported in the regression slot
        model_->g.backward(pb.x, grad, gp);
        adam_g_.step(model_->g.params(), float(lr));
        return;
    }

    const bool needs_triplet = w.temporal != TemporalMode::none;
    const bool uses_dt =
        w.temporal == TemporalMode::dt_aligned || w.temporal == TemporalMode::dt_unaligned;
    const bool aligned = w.temporal == TemporalMode::dt_aligned;

    TripletBatch tb;
    PairBatch pb;
    const PairBatch* center = nullptr;
    if (needs_triplet) {
        tb = sampler_.triplet_batch(batch_counter_++, cfg.batch_size);
        center = &tb.center;
    } else {
        pb = sampler_.pair_batch(batch_counter_++, cfg.batch_size);
        center = &pb;
    }

    model_->g.zero_grad();

    Generator<float>::Pass gp_mid;
    Tensor<float> f_mid = model_->g.forward(center->x, gp_mid, NetMode::train, true);

    // spatial adversarial + feature terms through D_s
    Discriminator<float>::Pass ps_fake, ps_real;
    Tensor<float> probs_s =
        ds_forward(model_->ds, center->x_rho, f_mid, ps_fake, NetMode::train, false);
    ds_forward(model_->ds, center->x_rho, center->y, ps_real, NetMode::train, false);

    std::array<Tensor<float>, 4> fgrads;
    double feature_val = 0.0;
    {
        std::array<Tensor<float>, 4> fa, fb;
        for (int j = 0; j < 4; ++j) {
            fa[size_t(j)] = ps_fake.act[size_t(j)];
            fb[size_t(j)] = ps_real.act[size_t(j)];
        }
        feature_val = double(feature_loss<float>(fa, fb, w.lambda_f));
        for (int j = 0; j < 4; ++j) {
            const Tensor<float>& a = ps_fake.act[size_t(j)];
            const Tensor<float>& b = ps_real.act[size_t(j)];
            Tensor<float> gf(a.shape);
            const double scale = 2.0 * w.lambda_f[size_t(j)] / double(a.size());
            for (std::size_t i = 0; i < a.size(); ++i)
                gf.data[i] = float(scale * (double(a.data[i]) - double(b.data[i])));
            fgrads[size_t(j)] = std::move(gf);
        }
    }

    Tensor<float> g_mid = ds_backward(model_->ds, ps_fake, dlogit_toward_one(probs_s), &fgrads,
                                      /*accumulate_params=*/false);

    // L1 anchor
    double l1_val = 0.0;
    {
        l1_val = double(l1_loss(f_mid, center->y, float(w.lambda_l1)));
        const double scale = w.lambda_l1 / double(f_mid.size());
        for (std::size_t i = 0; i < f_mid.size(); ++i) {
            const float d = f_mid.data[i] - center->y.data[i];
            g_mid.data[i] += float(d > 0 ? scale : (d < 0 ? -scale : 0.0));
        }
    }

    GLossBreakdown gl;
    gl.feature = feature_val;
    gl.l1 = l1_val;

    std::vector<float> probs_t_vec;
    Tensor<float> g_prev, g_next;
    Generator<float>::Pass gp_prev, gp_next;
    Tensor<float> f_prev, f_next;

    if (needs_triplet) {
        f_prev = model_->g.forward(tb.x_prev, gp_prev, NetMode::train, false);
        f_next = model_->g.forward(tb.x_next, gp_next, NetMode::train, false);
    }

    if (uses_dt) {
        Tensor<float> fp = aligned ? advect_batch(tb.coeffs_prev, f_prev, false) : f_prev;
        Tensor<float> fn = aligned ? advect_batch(tb.coeffs_next, f_next, false) : f_next;
        Discriminator<float>::Pass pt;
        Tensor<float> probs_t = dt_forward(model_->dt, fp, f_mid, fn, pt, NetMode::train, false);
        probs_t_vec = to_vec(probs_t);
        std::array<Tensor<float>, 3> gframes =
            dt_backward(model_->dt, pt, dlogit_toward_one(probs_t), /*accumulate_params=*/false);
        g_prev = aligned ? advect_batch(tb.coeffs_prev, gframes[0], true) : std::move(gframes[0]);
        for (std::size_t i = 0; i < g_mid.size(); ++i) g_mid.data[i] += gframes[1].data[i];
        g_next = aligned ? advect_batch(tb.coeffs_next, gframes[2], true) : std::move(gframes[2]);
    } else if (w.temporal == TemporalMode::l2t) {
        // mean (f_mid - A f_prev)^2 + mean (f_mid - A' f_next)^2
        Tensor<float> ap = advect_batch(tb.coeffs_prev, f_prev, false);
        Tensor<float> an = advect_batch(tb.coeffs_next, f_next, false);
        const double norm = w.lambda_l2t / double(f_mid.size());
        double val = 0.0;
        Tensor<float> dp(f_mid.shape), dn(f_mid.shape);
        for (std::size_t i = 0; i < f_mid.size(); ++i) {
            const double d = double(f_mid.data[i]) - double(ap.data[i]);
            val += d * d;
            dp.data[i] = float(2.0 * norm * d);
        }
        if (w.l2t_double_sided) {
            for (std::size_t i = 0; i < f_mid.size(); ++i) {
                const double d = double(f_mid.data[i]) - double(an.data[i]);
                val += d * d;
                dn.data[i] = float(2.0 * norm * d);
            }
        }
        gl.l2t = w.lambda_l2t * val / double(f_mid.size());
        for (std::size_t i = 0; i < f_mid.size(); ++i) g_mid.data[i] += dp.data[i] + dn.data[i];
        Tensor<float> mp(dp.shape), mn(dn.shape);
        for (std::size_t i = 0; i < dp.size(); ++i) mp.data[i] = -dp.data[i];
        g_prev = advect_batch(tb.coeffs_prev, mp, true);
        if (w.l2t_double_sided) {
            for (std::size_t i = 0; i < dn.size(); ++i) mn.data[i] = -dn.data[i];
            g_next = advect_batch(tb.coeffs_next, mn, true);
        }
    }

    gl.adv_s = double(g_adv_loss<float>(to_vec(probs_s), {}));
    if (uses_dt) gl.adv_t = double(g_adv_loss<float>({}, probs_t_vec));
    m.g = gl;

    model_->g.backward(center->x, g_mid, gp_mid);
    if (needs_triplet && g_prev.size()) model_->g.backward(tb.x_prev, g_prev, gp_prev);
    if (needs_triplet && g_next.size()) model_->g.backward(tb.x_next, g_next, gp_next);
    adam_g_.step(model_->g.params(), float(lr));
}

IterationMetrics Trainer::step(int64_t iteration) {
    const TrainConfig& cfg = model_->train;
    IterationMetrics m;
    m.iteration = iteration;
    m.lr = lr_schedule(iteration, cfg);
    const bool uses_dt = model_->weights.adversarial &&
                         (model_->weights.temporal == TemporalMode::dt_aligned ||
                          model_->weights.temporal == TemporalMode::dt_unaligned);
    if (model_->weights.adversarial)
        for (int k = 0; k < cfg.k_ds; ++k) ds_update(m.lr, m);
    if (uses_dt)
        for (int k = 0; k < cfg.k_dt; ++k) dt_update(m.lr, m);
    for (int k = 0; k < cfg.k_g; ++k) g_update(m.lr, m);
    model_->iteration = iteration + 1;
    return m;
}

TrainResult Trainer::run() {
    const TrainConfig& cfg = model_->train;
    TrainResult result;
    MetricsWriter metrics((fs::path(out_dir_) / "metrics.csv").string());
    result.metrics_path = metrics.path();

    const std::string final_path = (fs::path(out_dir_) / "checkpoint.tgck").string();
    for (int64_t it = 0; it < cfg.iterations; ++it) {
        IterationMetrics m = step(it);
        metrics.write(m);
        history_.push_back(m);

        const bool finite = std::isfinite(m.loss_ds) && std::isfinite(m.loss_dt) &&
                            std::isfinite(m.g.total());
        if (!finite) {
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "training aborted: non-finite loss at iteration %lld; last good checkpoint: %s",
                          (long long)it, last_checkpoint_.empty() ? "<none>" : last_checkpoint_.c_str());
            throw std::runtime_error(buf);
        }
        if (cfg.checkpoint_every > 0 && (it + 1) % cfg.checkpoint_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "checkpoint_%06lld.tgck", (long long)(it + 1));
            const std::string path = (fs::path(out_dir_) / name).string();
            save_checkpoint_file(path);
            last_checkpoint_ = path;
        }
    }
    save_checkpoint_file(final_path);
    result.checkpoint_path = final_path;
    result.iterations_run = cfg.iterations;
    return result;
}

namespace {

std::vector<StateView<float>> gather_buffers(ModelBundle& model, Adam<float>& ag, Adam<float>& ads,
                                             Adam<float>& adt, std::vector<float>& step_buf) {
    std::vector<StateView<float>> all;
    auto add_params = [&all](const std::string& prefix, std::vector<ParamView<float>> params) {
        for (auto& p : params) all.push_back({prefix + p.name, p.value});
    };
    auto add_state = [&all](const std::string& prefix, std::vector<StateView<float>> states) {
        for (auto& s : states) all.push_back({prefix + s.name, s.value});
    };
    add_params("", model.g.params());
    add_state("", model.g.state());
    add_params("ds.", model.ds.params());
    add_state("ds.", model.ds.state());
    add_params("dt.", model.dt.params());
    add_state("dt.", model.dt.state());
    add_state("opt.g.", ag.state(model.g.params()));
    add_state("opt.ds.", ads.state(model.ds.params()));
    add_state("opt.dt.", adt.state(model.dt.params()));
    step_buf = {float(ag.steps()), float(ads.steps()), float(adt.steps())};
    all.push_back({"opt.steps", &step_buf});
    return all;
}

} // namespace

void Trainer::save_checkpoint_file(const std::string& path) {
    std::vector<float> steps;
    auto buffers = gather_buffers(*model_, adam_g_, adam_ds_, adam_dt_, steps);
    save_checkpoint(path, architecture_hash(model_->gen_cfg, model_->ds_cfg, model_->dt_cfg),
                    model_->iteration, buffers);
}

int64_t Trainer::load_checkpoint_file(const std::string& path) {
    std::vector<float> steps(3, 0.0f);
    auto buffers = gather_buffers(*model_, adam_g_, adam_ds_, adam_dt_, steps);
    buffers.back().value = &steps;
    const int64_t it = load_checkpoint(
        path, architecture_hash(model_->gen_cfg, model_->ds_cfg, model_->dt_cfg), buffers);
    adam_g_.set_steps(int64_t(steps[0]));
    adam_ds_.set_steps(int64_t(steps[1]));
    adam_dt_.set_steps(int64_t(steps[2]));
    model_->iteration = it;
    return it;
}

BalanceReport eval_discriminator_balance(ModelBundle& model, const DatasetManifest& manifest,
                                         const std::string& split, int batches, int batch_size,
                                         int tile_lo, uint64_t seed) {
    TileSampler sampler(manifest, split,
                        BatchConfig{tile_lo, false, model.train.fields, seed});
    if (sampler.pair_count() == 0) throw std::runtime_error("balance eval: empty split");
    BalanceReport r;
    double n = 0;
    for (int bi = 0; bi < batches; ++bi) {
        TripletBatch tb = sampler.triplet_batch(uint64_t(bi), batch_size);
        Generator<float>::Pass gp0, gp1, gp2;
        Tensor<float> f_prev = model.g.forward(tb.x_prev, gp0, NetMode::eval, false);
        Tensor<float> f_mid = model.g.forward(tb.center.x, gp1, NetMode::eval, false);
        Tensor<float> f_next = model.g.forward(tb.x_next, gp2, NetMode::eval, false);

        Discriminator<float>::Pass p1, p2, p3, p4;
        Tensor<float> ds_real =
            ds_forward(model.ds, tb.center.x_rho, tb.center.y, p1, NetMode::eval, false);
        Tensor<float> ds_fake =
            ds_forward(model.ds, tb.center.x_rho, f_mid, p2, NetMode::eval, false);

        const bool aligned = model.weights.temporal != TemporalMode::dt_unaligned;
        Tensor<float> rp = aligned ? advect_batch(tb.coeffs_prev, tb.y_prev, false) : tb.y_prev;
        Tensor<float> rn = aligned ? advect_batch(tb.coeffs_next, tb.y_next, false) : tb.y_next;
        Tensor<float> fp = aligned ? advect_batch(tb.coeffs_prev, f_prev, false) : f_prev;
        Tensor<float> fn = aligned ? advect_batch(tb.coeffs_next, f_next, false) : f_next;
        Tensor<float> dt_real = dt_forward(model.dt, rp, tb.center.y, rn, p3, NetMode::eval, false);
        Tensor<float> dt_fake = dt_forward(model.dt, fp, f_mid, fn, p4, NetMode::eval, false);

        r.ds_real += mean(to_vec(ds_real));
        r.ds_fake += mean(to_vec(ds_fake));
        r.dt_real += mean(to_vec(dt_real));
        r.dt_fake += mean(to_vec(dt_fake));
        n += 1;
    }
    r.ds_real /= n;
    r.ds_fake /= n;
    r.dt_real /= n;
    r.dt_fake /= n;
    return r;
}

MetricsWriter::MetricsWriter(const std::string& path) : path_(path) {
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("metrics: cannot open " + path);
    std::fprintf(f, "iteration,lr,loss_ds,loss_dt,loss_g,g_adv_s,g_adv_t,g_feature,g_l1,g_l2t,"
                    "ds_real,ds_fake,dt_real,dt_fake\n");
    file_ = f;
}

MetricsWriter::~MetricsWriter() {
    if (file_) std::fclose(static_cast<FILE*>(file_));
}

void MetricsWriter::write(const IterationMetrics& m) {
    FILE* f = static_cast<FILE*>(file_);
    std::fprintf(f, "%lld,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g,%.6g,%.6g,%.6g,%.6g\n",
                 (long long)m.iteration, m.lr, m.loss_ds, m.loss_dt, m.g.total(), m.g.adv_s,
                 m.g.adv_t, m.g.feature, m.g.l1, m.g.l2t, m.ds_real, m.ds_fake, m.dt_real,
                 m.dt_fake);
    std::fflush(f);
}

} // namespace tempogan

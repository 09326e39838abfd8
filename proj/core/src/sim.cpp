#include "tempogan/sim.hpp"

#include "tempogan/advect.hpp"
#include "tempogan/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <stdexcept>

namespace tempogan {

namespace {

inline double cubic_pulse(double x) {
    x = std::min(std::abs(x), 1.0);
    return 1.0 - x * x * (3.0 - 2.0 * x);
}

void apply_inflows(GridField& rho, GridField& vel, const SceneSpec& spec) {
    const int d = rho.dim();
    const std::size_t cells = rho.cell_count();
    int stride[3] = {0, 0, 0};
    {
        int s = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[a] = s;
            s *= rho.shape(a);
        }
    }
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)cells; ++i) {
        int pos[3] = {0, 0, 0};
        std::size_t rem = std::size_t(i);
        for (int a = 0; a < d; ++a) {
            pos[a] = int(rem / std::size_t(stride[a]));
            rem %= std::size_t(stride[a]);
        }
        for (const SmokeInflow& in : spec.smoke_inflows) {
            double r2 = 0;
            for (int a = 0; a < d; ++a) r2 += (pos[a] - in.pos[a]) * (pos[a] - in.pos[a]);
            const double dist = std::sqrt(r2);
            if (dist < in.radius) {
                const float target = float(in.rate * cubic_pulse(dist / in.radius));
                float& cell = rho.values()[std::size_t(i)];
                cell = std::max(cell, target);
            }
        }
        for (const VelocityInflow& in : spec.velocity_inflows) {
            double r2 = 0;
            for (int a = 0; a < d; ++a) r2 += (pos[a] - in.pos[a]) * (pos[a] - in.pos[a]);
            const double dist = std::sqrt(r2);
            if (dist < in.radius) {
                const double blend = cubic_pulse(dist / in.radius);
                float* v = vel.data() + std::size_t(i) * std::size_t(d);
                for (int a = 0; a < d; ++a) {
                    const double target = in.magnitude * in.dir[a];
                    v[a] = float(v[a] + blend * (target - v[a]));
                }
            }
        }
    }
}

// Zero velocity on the outermost cell layer (no-slip walls). Runs before the
// projection so the divergence bound holds on the final field.
void apply_wall_bcs(GridField& vel) {
    const int d = vel.dim();
    const std::size_t cells = vel.cell_count();
    int stride[3] = {0, 0, 0};
    {
        int s = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[a] = s;
            s *= vel.shape(a);
        }
    }
    for (std::size_t i = 0; i < cells; ++i) {
        std::size_t rem = i;
        bool wall = false;
        for (int a = 0; a < d; ++a) {
            const int p = int(rem / std::size_t(stride[a]));
            rem %= std::size_t(stride[a]);
            if (p == 0 || p == vel.shape(a) - 1) wall = true;
        }
        if (wall)
            for (int a = 0; a < d; ++a) vel.data()[i * std::size_t(d) + std::size_t(a)] = 0.0f;
    }
}

// Mirrored central-difference gradient, the operator whose negative adjoint
// is divergence(); the projection solves (G^T G) p = G^T v.
void gradient(const std::vector<double>& p, const std::vector<int>& shape, std::vector<double>& g) {
    const int d = int(shape.size());
    int stride[3] = {0, 0, 0};
    {
        int s = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[a] = s;
            s *= shape[size_t(a)];
        }
    }
    const std::size_t cells = p.size();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)cells; ++i) {
        std::size_t rem = std::size_t(i);
        for (int a = 0; a < d; ++a) {
            const int n = shape[size_t(a)];
            const int x = int(rem / std::size_t(stride[a]));
            rem %= std::size_t(stride[a]);
            const std::size_t st = std::size_t(stride[a]);
            double val;
            if (n == 1)
                val = 0.0;
            else if (x == 0)
                val = 0.5 * (p[std::size_t(i) + st] - p[std::size_t(i)]);
            else if (x == n - 1)
                val = 0.5 * (p[std::size_t(i)] - p[std::size_t(i) - st]);
            else
                val = 0.5 * (p[std::size_t(i) + st] - p[std::size_t(i) - st]);
            g[std::size_t(i) * std::size_t(d) + std::size_t(a)] = val;
        }
    }
}

// g_out = G^T u for a vector field u (d channels): exact adjoint of gradient().
void gradient_transpose(const std::vector<double>& u, const std::vector<int>& shape,
                        std::vector<double>& out) {
    const int d = int(shape.size());
    int stride[3] = {0, 0, 0};
    {
        int s = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[a] = s;
            s *= shape[size_t(a)];
        }
    }
    const std::size_t cells = out.size();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)cells; ++i) {
        std::size_t rem = std::size_t(i);
        double acc = 0.0;
        for (int a = 0; a < d; ++a) {
            const int n = shape[size_t(a)];
            const int x = int(rem / std::size_t(stride[a]));
            rem %= std::size_t(stride[a]);
            if (n == 1) continue;
            const std::size_t st = std::size_t(stride[a]) * std::size_t(d);
            const std::size_t base = std::size_t(i) * std::size_t(d) + std::size_t(a);
            // contributions of column i across gradient rows
            if (x == 0)
                acc += -0.5 * u[base] - 0.5 * u[base + st];
            else if (x == n - 1)
                acc += 0.5 * u[base] + 0.5 * u[base - st];
            else {
                acc += 0.5 * u[base - st];
                acc -= 0.5 * u[base + st];
            }
        }
        out[std::size_t(i)] = acc;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

GridField advect_semi_lagrangian(const GridField& f, const GridField& v, float dt) {
    AdvectionCoeffs c = build_coeffs(v, dt);
    return advect_apply(c, f);
}

GridField advect_maccormack(const GridField& f, const GridField& v, float dt) {
    const int d = f.dim();
    AdvectionCoeffs fwd = build_coeffs(v, dt);
    GridField predicted = advect_apply(fwd, f);
    AdvectionCoeffs bwd = build_coeffs(v, -dt);
    GridField back = advect_apply(bwd, predicted);

    GridField out = predicted;
    const int C = f.channels();
    const std::size_t cells = f.cell_count();
    const int st = fwd.stencil();
    int stride[3] = {0, 0, 0};
    {
        int s = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[a] = s;
            s *= f.shape(a);
        }
    }
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)cells; ++i) {
        // plain semi-Lagrangian next to walls, corrected + clamped elsewhere
        bool near_wall = false;
        {
            std::size_t rem = std::size_t(i);
            for (int a = 0; a < d; ++a) {
                const int x = int(rem / std::size_t(stride[a]));
                rem %= std::size_t(stride[a]);
                if (x <= 0 || x >= f.shape(a) - 1) near_wall = true;
            }
        }
        const AdvectionCoeffs::Row& row = fwd.row(std::size_t(i));
        for (int ch = 0; ch < C; ++ch) {
            const std::size_t at = std::size_t(i) * std::size_t(C) + std::size_t(ch);
            if (near_wall) continue; // out already holds the predictor
            float lo = 3.4e38f, hi = -3.4e38f;
            for (int k = 0; k < st; ++k) {
                const float s = f.data()[std::size_t(row.index[size_t(k)]) * std::size_t(C) + std::size_t(ch)];
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            float val = predicted.data()[at] + 0.5f * (f.data()[at] - back.data()[at]);
            if (val < lo || val > hi) val = predicted.data()[at];
            out.data()[at] = val;
        }
    }
    return out;
}

int pressure_project(GridField& vel, const SceneSpec& spec, GridField* pressure) {
    const int d = vel.dim();
    const std::vector<int>& shape = vel.shape();
    const std::size_t cells = vel.cell_count();

    // rhs = G^T v
    std::vector<double> u(cells * std::size_t(d));
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = double(vel.values()[i]);
    std::vector<double> rhs(cells);
    gradient_transpose(u, shape, rhs);

    std::vector<double> p(cells, 0.0);
    if (pressure && pressure->cell_count() == cells && pressure->channels() == 1)
        for (std::size_t i = 0; i < cells; ++i) p[i] = double(pressure->values()[i]);

    std::vector<double> g(cells * std::size_t(d)), Ap(cells), r(cells), z(cells), dir(cells);

    auto apply_A = [&](const std::vector<double>& x, std::vector<double>& out) {
        gradient(x, shape, g);
        gradient_transpose(g, shape, out);
    };

    apply_A(p, Ap);
    for (std::size_t i = 0; i < cells; ++i) r[i] = rhs[i] - Ap[i];

    // Jacobi preconditioner. Each gradient column is touched by exactly two
    // rows with weight 1/2, so diag(G^T G) = d/2 everywhere; this only
    // rescales, kept for form.
    std::vector<double> diag(cells, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
        double acc = 0.0;
        for (int a = 0; a < d; ++a)
            if (shape[size_t(a)] > 1) acc += 0.5;
        diag[i] = std::max(acc, 1e-12);
    }

    int iters = 0;
    double rmax = max_abs(r);
    if (rmax > spec.cg_tol) {
        for (std::size_t i = 0; i < cells; ++i) z[i] = r[i] / diag[i];
        dir = z;
        double rz = dot(r, z);
        for (iters = 1; iters <= spec.cg_max_iters; ++iters) {
            apply_A(dir, Ap);
            const double dAd = dot(dir, Ap);
            if (dAd <= 0.0) break; // null-space direction; residual already tiny
            const double alpha = rz / dAd;
            for (std::size_t i = 0; i < cells; ++i) p[i] += alpha * dir[i];
            for (std::size_t i = 0; i < cells; ++i) r[i] -= alpha * Ap[i];
            rmax = max_abs(r);
            if (rmax <= spec.cg_tol) break;
            for (std::size_t i = 0; i < cells; ++i) z[i] = r[i] / diag[i];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < cells; ++i) dir[i] = z[i] + beta * dir[i];
        }
        if (rmax > spec.cg_tol) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "pressure CG did not converge: residual %.3e after %d iterations", rmax,
                          spec.cg_max_iters);
            throw std::runtime_error(buf);
        }
    }

    // v -= G p
    gradient(p, shape, g);
    for (std::size_t i = 0; i < u.size(); ++i) vel.values()[i] = float(u[i] - g[i]);

    if (pressure) {
        if (pressure->cell_count() != cells || pressure->channels() != 1)
            *pressure = GridField(shape, 1);
        for (std::size_t i = 0; i < cells; ++i) pressure->values()[i] = float(p[i]);
    }
    return iters;
}

void solver_step(GridField& rho, GridField& vel, const SceneSpec& spec, GridField* pressure) {
    if (rho.shape() != vel.shape()) throw std::runtime_error("solver_step: shape mismatch");
    if (vel.channels() != vel.dim()) throw std::runtime_error("solver_step: velocity needs dim channels");

    apply_inflows(rho, vel, spec);

    GridField vel0 = vel; // advect both fields with the pre-step velocity
    rho = advect_maccormack(rho, vel0, 1.0f);
    vel = advect_maccormack(vel, vel0, 1.0f);

    // buoyancy force b * rho
    const int d = vel.dim();
    const std::size_t cells = vel.cell_count();
    for (std::size_t i = 0; i < cells; ++i) {
        const float r = rho.values()[i];
        for (int a = 0; a < d; ++a) vel.data()[i * std::size_t(d) + std::size_t(a)] += float(spec.buoyancy[a]) * r;
    }

    apply_wall_bcs(vel);
    pressure_project(vel, spec, pressure);
}

SceneSpec SceneSpec::randomized(uint64_t seed, std::vector<int> shape, int frames) {
    SceneSpec spec;
    spec.seed = seed;
    spec.shape = std::move(shape);
    spec.frames = frames;
    const int d = int(spec.shape.size());
    Rng rng = Rng::substream(seed, 0x5ce11eull, 0);

    const double min_side = double(*std::min_element(spec.shape.begin(), spec.shape.end()));
    const int n_smoke = 1 + int(rng.uniform_index(3));
    for (int i = 0; i < n_smoke; ++i) {
        SmokeInflow in;
        in.radius = rng.uniform(0.05, 0.15) * min_side;
        for (int a = 0; a < d; ++a) {
            const double margin = in.radius + 1.0;
            double hi_pos = double(spec.shape[size_t(a)] - 1) - margin;
            // smoke enters in the lower half so plumes have room to rise
            if (a == 1) hi_pos = margin + 0.45 * (hi_pos - margin);
            in.pos[a] = rng.uniform(margin, std::max(margin + 1e-6, hi_pos));
        }
        in.rate = rng.uniform(0.5, 1.0);
        spec.smoke_inflows.push_back(in);
    }

    const int n_vel = int(rng.uniform_index(3)); // 0-2
    for (int i = 0; i < n_vel; ++i) {
        VelocityInflow in;
        in.radius = rng.uniform(0.05, 0.12) * min_side;
        for (int a = 0; a < d; ++a) {
            const double margin = in.radius + 1.0;
            const double hi_pos = double(spec.shape[size_t(a)] - 1) - margin;
            in.pos[a] = rng.uniform(margin, std::max(margin + 1e-6, hi_pos));
        }
        if (d == 2) {
            const double ang = rng.uniform(0.0, 2.0 * M_PI);
            in.dir[0] = std::cos(ang);
            in.dir[1] = std::sin(ang);
        } else {
            const double ang = rng.uniform(0.0, 2.0 * M_PI);
            const double pitch = rng.uniform(-0.5, 0.5);
            in.dir[0] = std::cos(ang) * std::cos(pitch);
            in.dir[1] = std::sin(pitch);
            in.dir[2] = std::sin(ang) * std::cos(pitch);
        }
        in.magnitude = rng.uniform(0.5, 2.0);
        spec.velocity_inflows.push_back(in);
    }

    const double mag = rng.log_uniform(1e-3, 4e-3);
    const double tilt = rng.uniform(-0.3, 0.3);
    spec.buoyancy[0] = mag * std::sin(tilt);
    spec.buoyancy[1] = mag * std::cos(tilt);
    if (d == 3) spec.buoyancy[2] = 0.0;
    return spec;
}

void SceneSpec::validate() const {
    const int d = int(shape.size());
    if (d < 2 || d > 3) throw std::runtime_error("SceneSpec: dim must be 2 or 3");
    if (frames < 3) throw std::runtime_error("SceneSpec: frame count must be >= 3");
    auto check_inside = [&](const double* pos, double radius) {
        for (int a = 0; a < d; ++a)
            if (pos[a] - radius < 0.0 || pos[a] + radius > double(shape[size_t(a)] - 1))
                throw std::runtime_error("SceneSpec: inflow region outside domain");
    };
    for (const auto& in : smoke_inflows) check_inside(in.pos, in.radius);
    for (const auto& in : velocity_inflows) check_inside(in.pos, in.radius);
}

double total_mass(const GridField& rho) {
    double acc = 0.0;
    for (float v : rho.values()) acc += double(v);
    return acc;
}

double mean_value(const GridField& rho) {
    return rho.size() ? total_mass(rho) / double(rho.size()) : 0.0;
}

DatasetManifest generate_dataset(const DatasetOptions& opts) {
    namespace fs = std::filesystem;
    if (opts.out_dir.empty()) throw std::runtime_error("generate_dataset: out_dir required");
    if (opts.n_sims < 1) throw std::runtime_error("generate_dataset: n_sims must be >= 1");
    fs::create_directories(opts.out_dir);

    DatasetManifest m;
    m.scale = opts.scale;
    m.seed = opts.seed;
    m.hi_shape = opts.hi_shape;

    // 80/20 split by simulation id (at least one test sim once there are two)
    std::vector<int> ids(size_t(opts.n_sims));
    std::iota(ids.begin(), ids.end(), 0);
    {
        Rng rng = Rng::substream(opts.seed, 0x5b711full, 0);
        for (std::size_t i = ids.size(); i > 1; --i)
            std::swap(ids[i - 1], ids[size_t(rng.uniform_index(i))]);
    }
    int n_test = int(std::lround(opts.test_fraction * opts.n_sims));
    if (opts.n_sims >= 2) n_test = std::min(std::max(n_test, 1), opts.n_sims - 1);
    else n_test = 0;
    std::vector<bool> is_test(size_t(opts.n_sims), false);
    for (int i = 0; i < n_test; ++i) is_test[size_t(ids[size_t(opts.n_sims - 1 - i)])] = true;

    double mean_acc = 0.0, max_acc = 0.0;
    std::size_t kept = 0;

    for (int sim = 0; sim < opts.n_sims; ++sim) {
        SceneSpec spec = opts.scene_for ? opts.scene_for(sim)
                                        : SceneSpec::randomized(Rng::substream(opts.seed, 0x5ce9eull, uint64_t(sim)).next(),
                                                                opts.hi_shape, opts.frames);
        spec.validate();
        for (int a = 0; a < int(opts.hi_shape.size()); ++a)
            if (opts.hi_shape[size_t(a)] % opts.scale != 0)
                throw std::runtime_error("generate_dataset: hi shape not divisible by scale");

        SimEntry entry;
        entry.id = sim;
        entry.split = is_test[size_t(sim)] ? "test" : "train";

        char dir[64];
        std::snprintf(dir, sizeof dir, "sim_%04d", sim);
        fs::create_directories(fs::path(opts.out_dir) / dir);

        const int d = int(opts.hi_shape.size());
        GridField rho(opts.hi_shape, 1), vel(opts.hi_shape, d), pressure(opts.hi_shape, 1);
        for (int frame = 0; frame < spec.frames; ++frame) {
            solver_step(rho, vel, spec, &pressure);
            ++m.frames_total;

            GridField x_rho = downsample(rho, opts.scale, ResampleKind::passive);
            const double mean_lo = mean_value(x_rho);
            if (mean_lo < spec.density_reject) continue;

            GridField x_vel = downsample(vel, opts.scale, ResampleKind::velocity);

            FrameEntry f;
            f.index = frame;
            char name[96];
            auto emit = [&](const char* tag, const GridField& g, std::string& slot) {
                std::snprintf(name, sizeof name, "%s/frame_%04d_%s.tgf", dir, frame, tag);
                write_tgf(g, (fs::path(opts.out_dir) / name).string());
                slot = name;
            };
            emit("x_density", x_rho, f.x_density);
            emit("x_velocity", x_vel, f.x_velocity);
            emit("y_density", rho, f.y_density);
            emit("y_velocity", vel, f.y_velocity);
            entry.frames.push_back(std::move(f));

            mean_acc += mean_lo;
            float mx = 0.0f;
            for (float v : x_rho.values()) mx = std::max(mx, v);
            max_acc = std::max(max_acc, double(mx));
            ++kept;
        }
        m.sims.push_back(std::move(entry));
    }

    m.mean_density_lo = kept ? mean_acc / double(kept) : 0.0;
    m.max_density_lo = max_acc;
    save_manifest(m, (fs::path(opts.out_dir) / "manifest.json").string());
    m.root = opts.out_dir;
    return m;
}

} // namespace tempogan

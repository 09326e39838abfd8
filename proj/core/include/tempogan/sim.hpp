#pragma once

#include "tempogan/field.hpp"
#include "tempogan/manifest.hpp"
#include "tempogan/rng.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tempogan {

struct SmokeInflow {
    double pos[3] = {0, 0, 0}; // cell coordinates at the high-res grid
    double radius = 0;
    double rate = 1.0; // target density inside the region
};

struct VelocityInflow {
    double pos[3] = {0, 0, 0};
    double radius = 0;
    double dir[3] = {0, 1, 0}; // unit direction
    double magnitude = 1.0;    // cells per frame at the high-res grid
};

//! Randomized smoke scene: closed no-slip box, smoke and velocity inflow
//! regions, buoyancy along (roughly) +y.
struct SceneSpec {
    uint64_t seed = 0;
    std::vector<int> shape = {256, 256}; // high-res grid
    int frames = 120;
    std::vector<SmokeInflow> smoke_inflows;
    std::vector<VelocityInflow> velocity_inflows;
    double buoyancy[3] = {0, 2e-3, 0}; // acceleration per unit density, cells/frame^2

    double cg_tol = 1e-5; // max |residual| target for the pressure solve
    int cg_max_iters = 600;
    double density_reject = 0.02;

    //! Randomized scene per the data-generation recipe: 1-3 smoke inflows
    //! (radius 5-15% of the domain), 0-2 velocity inflows, buoyancy magnitude
    //! log-uniform in [1e-3, 4e-3].
    static SceneSpec randomized(uint64_t seed, std::vector<int> shape, int frames);

    void validate() const; // inflows inside domain, frames >= 3
};

//! One solver step: inflows, MacCormack advection of density and velocity,
//! buoyancy, wall handling, pressure projection. After the step
//! max_abs_divergence(v) <= 10 * cg_tol (1e-4 at defaults). Throws if the CG
//! solve fails to reach cg_tol within cg_max_iters (message carries the
//! residual).
//!
//! `pressure`, when given, is used as warm start and receives the solution;
//! pass the previous frame's pressure when stepping a simulation in sequence.
void solver_step(GridField& rho, GridField& vel, const SceneSpec& spec,
                 GridField* pressure = nullptr);

//! Divergence-free projection used by solver_step; exposed for tests.
//! Returns the number of CG iterations spent.
int pressure_project(GridField& vel, const SceneSpec& spec, GridField* pressure = nullptr);

//! MacCormack advection (clamped, semi-Lagrangian fallback at boundaries) of
//! all channels of f along v over dt frames.
GridField advect_maccormack(const GridField& f, const GridField& v, float dt);

//! Semi-Lagrangian building block (also the MacCormack predictor).
GridField advect_semi_lagrangian(const GridField& f, const GridField& v, float dt);

double total_mass(const GridField& rho);
double mean_value(const GridField& rho);

struct DatasetOptions {
    int n_sims = 4;
    std::vector<int> hi_shape = {128, 128};
    int frames = 60;
    int scale = 4;
    uint64_t seed = 1;
    std::string out_dir;
    double test_fraction = 0.2;
    //! Scene override hook; defaults to SceneSpec::randomized per sim id.
    std::function<SceneSpec(int)> scene_for;
};

//! Runs n_sims randomized simulations and writes per-frame TGF1 bundles:
//! y = {rho_hi, v_hi}, x = downsample by `scale` (velocity rescaled). Frames
//! with mean(rho_lo) below the rejection threshold are discarded. Sims are
//! split 80/20 into train/test by id. Returns the saved manifest.
DatasetManifest generate_dataset(const DatasetOptions& opts);

} // namespace tempogan

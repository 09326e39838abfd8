#pragma once

#include "tempogan/config.hpp"
#include "tempogan/train.hpp"

#include <string>
#include <vector>

namespace tempogan {

//! One named training configuration inside a comparison suite. Every run
//! shares the base config (seed, data order, iteration budget); only the
//! listed aspects differ, so metric differences are attributable to them.
struct AblationRun {
    std::string name;
    TemporalMode temporal = TemporalMode::dt_aligned;
    InputFields fields = InputFields::density_velocity;
    std::array<double, 4> lambda_f = {-1e-5, -1e-5, -1e-5, -1e-5};
    bool use_gan = true; // false: plain L2 regression, no discriminators
};

struct AblationSuite {
    RunConfig base;
    std::vector<AblationRun> runs;
};

AblationSuite load_suite(const std::string& path);

struct AblationRow {
    std::string name;
    bool ok = false;
    std::string error;
    double temporal_advected = 0; // mean over test frames
    double temporal_raw = 0;
    double psnr = 0;
    double grad_mag = 0; // mean |grad rho| detail proxy
    double mass = 0;     // mean total output density
    double ds_real = 0, ds_fake = 0;
};

struct AblationReport {
    std::vector<AblationRow> rows;
    bool complete = true;
};

//! Trains every configuration and evaluates it on the held-out split:
//! advection-compensated and raw temporal metrics, PSNR against the
//! reference, mean gradient magnitude (detail proxy) and total mass.
AblationReport run_suite(const DatasetManifest& manifest, const AblationSuite& suite,
                         const std::string& out_dir);

void write_report(const AblationReport& report, const std::string& path);

//! Evaluation-only pass used by run_suite and the eval command.
AblationRow evaluate_model(ModelBundle& model, const DatasetManifest& manifest,
                           const std::string& split, int max_frames = 16);

} // namespace tempogan

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tempogan {

//! One frame's file bundle: low-res input x and high-res target y.
struct FrameEntry {
    int index = 0;
    std::string x_density;
    std::string x_velocity;
    std::string y_density;
    std::string y_velocity;
};

struct SimEntry {
    int id = 0;
    std::string split = "train"; // "train" or "test"
    std::vector<FrameEntry> frames; // sorted by index; gaps where frames were rejected
};

//! Index of a generated dataset. All paths are relative to the manifest's
//! directory.
struct DatasetManifest {
    int version = 1;
    int scale = 4;
    uint64_t seed = 0;
    std::vector<int> hi_shape;
    double mean_density_lo = 0.0;
    double max_density_lo = 0.0;
    int frames_total = 0; // before rejection
    std::vector<SimEntry> sims;

    std::string root; // directory of the manifest file (set on load)

    std::string resolve(const std::string& rel) const;

    std::vector<const SimEntry*> split_sims(const std::string& split) const;

    //! Frames usable as triplet centers: index-1 and index+1 both present.
    static std::vector<int> triplet_centers(const SimEntry& sim);
};

void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

//! Checks that every referenced file exists and parses as TGF1 with
//! consistent shapes (y = scale * x) and strictly increasing frame indices.
//! Throws with the offending path on failure.
void validate_manifest(const DatasetManifest& m);

} // namespace tempogan

#pragma once

#include "tempogan/layers.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tempogan {

uint64_t fnv1a(const std::string& s);

//! Versioned binary checkpoint: every named float buffer (parameters, BN
//! running statistics, ADAM moments) plus the training iteration and a hash
//! of the architecture-defining configuration. Loading rejects hash or
//! buffer-layout mismatches.
void save_checkpoint(const std::string& path, uint64_t config_hash, int64_t iteration,
                     const std::vector<StateView<float>>& buffers);

//! Returns the stored iteration. `buffers` must enumerate exactly the saved
//! names with matching sizes.
int64_t load_checkpoint(const std::string& path, uint64_t expected_hash,
                        const std::vector<StateView<float>>& buffers);

//! Reads only the header (config hash, iteration).
void read_checkpoint_header(const std::string& path, uint64_t& config_hash, int64_t& iteration);

} // namespace tempogan

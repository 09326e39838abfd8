#pragma once

#include "tempogan/field.hpp"

#include <string>

namespace tempogan {

//! TGF1 container: magic "TGF1", u32 version=1, u32 dim, u32 shape per axis
//! (x, y[, z] order), u32 channels, float32 little-endian payload in storage
//! order. Round trips are bit-exact.
void write_tgf(const GridField& f, const std::string& path);
GridField read_tgf(const std::string& path);

} // namespace tempogan

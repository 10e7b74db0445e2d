#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>

#include "ssorl/nn/param_set.hpp"

namespace ssorl::nn {

// Parameter checkpoint layout (all integers and floats little-endian):
//
//   "SSORL1"                  6 magic bytes
//   u32 version               currently 1
//   repeated until EOF:
//     u32 name_length, name bytes (UTF-8)
//     u32 rank, u64 extents[rank]
//     f64 values[prod(extents)]  row-major
//
// Optimizer moments are not stored; a loaded ParamSet starts at step 0.

inline constexpr char kCheckpointMagic[] = "SSORL1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const ParamSet& params);
ParamSet read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params);
ParamSet load_checkpoint(const std::filesystem::path& path);

}  // namespace ssorl::nn

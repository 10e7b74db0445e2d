#pragma once

#include <filesystem>
#include <iosfwd>

#include "ssorl/env/trajectory.hpp"

namespace ssorl::env {

// Trajectory dataset file, all integers and floats little-endian:
//
//   "SSTRAJ1"            7 magic bytes
//   u32                  format version (1)
//   u32 len, bytes       environment id
//   u32 state_dim, u32 action_dim
//   u64 count
//   u32 len, bytes       provenance JSON
//   count records of:
//     u64 T, u8 has_actions
//     f64[(T+1) * state_dim]   states, row-major
//     f64[T * action_dim]      actions (only when has_actions = 1)
//     f64[T]                   rewards
//     i64 policy_id, u64 seed, f64 total_return, u64 source_index

inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

/// JSON-lines export: a header object, then one object per trajectory.
/// Doubles are written with round-trip precision, so import is lossless.
void export_jsonl(const std::filesystem::path& path, const Dataset& dataset);
Dataset import_jsonl(const std::filesystem::path& path);

}  // namespace ssorl::env

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "daa/trajectory.hpp"

namespace daa {

// DAAT layout, little-endian:
//   "DAAT" | u32 version=1 | u32 n_frames | u32 n_tokens | u32 map_dim |
//   u32 eos_index (1-based) | u8 roles[n_tokens] | u32 id_len | id bytes |
//   u32 prompt_len | prompt bytes | f32 payload[n_frames][n_tokens][dim][dim]
inline constexpr std::uint32_t kDaatVersion = 1;
inline constexpr char kDaatMagic[4] = {'D', 'A', 'A', 'T'};

std::vector<std::uint8_t> save_trajectory(const Trajectory& traj);

/// Parses and validates a DAAT byte stream. Failures carry the byte offset and
/// the field that could not be accepted.
Trajectory load_trajectory(std::span<const std::uint8_t> bytes);

Trajectory read_trajectory_file(const std::filesystem::path& path);
void write_trajectory_file(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace daa

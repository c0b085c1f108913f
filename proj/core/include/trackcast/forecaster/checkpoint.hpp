#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trackcast/forecaster/model.hpp"

namespace trackcast::forecaster {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout, all integers and reals little-endian:
//   "TRKCKPT\0", u32 version,
//   config block (variant, window, layers, hidden, kernel_width,
//   output_width, positions, flags, per-category bit, seed),
//   scaling block (10 + 10 input, 6 + 6 passthrough doubles),
//   u64 parameter count, then per parameter: u32 name length, name,
//   u32 rank, u64 dims, followed by all parameter payloads as f64.
std::vector<std::uint8_t> save_checkpoint(const ForecastModel& model);
// Throws LoadError on bad magic, version, truncation or a shape table that
// does not match the configuration.
ForecastModel load_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const ForecastModel& model, const std::filesystem::path& path);
ForecastModel read_checkpoint(const std::filesystem::path& path);

} // namespace trackcast::forecaster

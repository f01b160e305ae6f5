#pragma once

#include <ivs/eval/metrics.hpp>

#include <cstdint>
#include <filesystem>
#include <string_view>

namespace ivs::eval {

/// "IVSD" read as a little-endian u32.
inline constexpr std::uint32_t kDepthMagic = 0x44535649u;

/**
 * Depth files: `.png` is 16-bit millimeters with 0 marking invalid pixels; anything else is the
 * float layout `u32 width, u32 height, u32 magic` followed by row-major little-endian float32
 * meters, where non-finite or non-positive values are invalid.
 */
DepthMap readDepth(const std::filesystem::path& path);
void writeDepth(const DepthMap& map, const std::filesystem::path& path);

DepthMap readDepthPng16(const std::filesystem::path& path);
void writeDepthPng16(const DepthMap& map, const std::filesystem::path& path);
DepthMap readDepthFloat(const std::filesystem::path& path);
void writeDepthFloat(const DepthMap& map, const std::filesystem::path& path);

/// TUM format: `t x y z qx qy qz qw` per line, `#` comments.
Trajectory parseTum(std::string_view text);
std::string formatTum(const Trajectory& t);
Trajectory readTum(const std::filesystem::path& path);
void writeTum(const Trajectory& t, const std::filesystem::path& path);

}  // namespace ivs::eval

#pragma once

#include <ivs/media/image.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ivs::media {

enum class ColorMode
{
    Rgb,
    Gray,
    Unchanged,  ///< keep 1 or 3 channels as stored (alpha dropped)
};

Image decodeImage(std::span<const std::uint8_t> bytes, ColorMode mode = ColorMode::Rgb);
Image readImage(const std::filesystem::path& path, ColorMode mode = ColorMode::Rgb);

std::vector<std::uint8_t> encodePng(const Image& img);
std::vector<std::uint8_t> encodeJpeg(const Image& img, int quality = 90);
void writePng(const std::filesystem::path& path, const Image& img);

/// Single channel 16-bit image (depth maps in millimeters).
struct Image16
{
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> samples;
};

Image16 readPng16(const std::filesystem::path& path);
void writePng16(const std::filesystem::path& path, const Image16& img);

bool hasImageExtension(const std::filesystem::path& path);

std::vector<std::uint8_t> readFileBytes(const std::filesystem::path& path);
void writeFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace ivs::media

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ivs::media {

struct Size
{
    int width = 0;
    int height = 0;

    bool operator==(const Size&) const = default;
};

/// Axis-aligned region of interest in pixel coordinates.
struct Roi
{
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool operator==(const Roi&) const = default;

    bool isValidFor(Size image) const
    {
        return x >= 0 && y >= 0 && w >= 1 && h >= 1 && x + w <= image.width && y + h <= image.height;
    }
};

/// Region `inner` expressed in the coordinates of an image already cropped to `outer`.
Roi composeRoi(const Roi& outer, const Roi& inner);

/**
 * @brief 8-bit interleaved image with 1 (gray) or 3 (RGB) channels.
 */
class Image
{
public:
    Image() = default;
    Image(int width, int height, int channels, std::uint8_t fill = 0);
    Image(int width, int height, int channels, std::vector<std::uint8_t> samples);

    int width() const { return _width; }
    int height() const { return _height; }
    int channels() const { return _channels; }
    Size size() const { return {_width, _height}; }
    bool empty() const { return _samples.empty(); }

    std::uint8_t& at(int x, int y, int c = 0) { return _samples[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c = 0) const { return _samples[index(x, y, c)]; }

    std::span<const std::uint8_t> samples() const { return _samples; }
    std::span<std::uint8_t> samples() { return _samples; }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int x, int y, int c) const
    {
        return (static_cast<std::size_t>(y) * _width + x) * _channels + c;
    }

    int _width = 0;
    int _height = 0;
    int _channels = 0;
    std::vector<std::uint8_t> _samples;
};

/**
 * @brief Real-valued single channel image used by the flow and focus kernels.
 */
class GrayImageF
{
public:
    GrayImageF() = default;
    GrayImageF(int width, int height, double fill = 0.0);

    int width() const { return _width; }
    int height() const { return _height; }
    Size size() const { return {_width, _height}; }
    std::size_t pixelCount() const { return _data.size(); }

    double& at(int x, int y) { return _data[static_cast<std::size_t>(y) * _width + x]; }
    double at(int x, int y) const { return _data[static_cast<std::size_t>(y) * _width + x]; }

    // replicate border
    double atClamped(int x, int y) const;

    std::span<const double> data() const { return _data; }
    std::span<double> data() { return _data; }

private:
    int _width = 0;
    int _height = 0;
    std::vector<double> _data;
};

/// BT.601 luma, round-half-up. One channel input is returned unchanged.
Image toGrayscale(const Image& img);

GrayImageF toReal(const Image& gray);

/// Rounds half-up and saturates to [0, 255].
Image fromReal(const GrayImageF& img);

Image crop(const Image& img, const Roi& roi);

/**
 * @brief Crop then bilinear resize.
 *
 * Sampling uses pixel-center alignment: source = (dst + 0.5) * in / out - 0.5, clamped to the
 * image, and results are rounded half-up. Aspect ratio is the caller's responsibility.
 */
Image resizeCrop(const Image& img, const std::optional<Roi>& roi, const std::optional<Size>& target);

GrayImageF resizeBilinear(const GrayImageF& img, Size target);

/// Average-pool by an integer factor; trailing rows/columns that do not fill a cell are dropped.
GrayImageF downscaleBox(const GrayImageF& img, int factor);

}  // namespace ivs::media

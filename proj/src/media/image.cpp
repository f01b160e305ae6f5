#include <ivs/media/image.hpp>

#include <ivs/error.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace ivs::media {

namespace {

void checkDimensions(int width, int height, int channels)
{
    if (width < 1 || height < 1)
        throw Error(ErrorCode::InvalidArgument,
                    "image dimensions must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
    if (channels != 1 && channels != 3)
        throw Error(ErrorCode::InvalidArgument, "unsupported channel count " + std::to_string(channels));
}

std::uint8_t roundToByte(double v)
{
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

struct Tap
{
    int i0;
    int i1;
    double w1;
};

std::vector<Tap> bilinearTaps(int in, int out)
{
    std::vector<Tap> taps(out);
    for (int d = 0; d < out; ++d)
    {
        double s = (d + 0.5) * in / out - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(in - 1));
        const int i0 = static_cast<int>(std::floor(s));
        const int i1 = std::min(i0 + 1, in - 1);
        taps[d] = {i0, i1, s - i0};
    }
    return taps;
}

}  // namespace

Roi composeRoi(const Roi& outer, const Roi& inner)
{
    return {outer.x + inner.x, outer.y + inner.y, inner.w, inner.h};
}

Image::Image(int width, int height, int channels, std::uint8_t fill)
{
    checkDimensions(width, height, channels);
    _width = width;
    _height = height;
    _channels = channels;
    _samples.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> samples)
{
    checkDimensions(width, height, channels);
    if (samples.size() != static_cast<std::size_t>(width) * height * channels)
        throw Error(ErrorCode::InvalidArgument, "sample buffer length does not match image dimensions");
    _width = width;
    _height = height;
    _channels = channels;
    _samples = std::move(samples);
}

GrayImageF::GrayImageF(int width, int height, double fill)
{
    checkDimensions(width, height, 1);
    _width = width;
    _height = height;
    _data.assign(static_cast<std::size_t>(width) * height, fill);
}

double GrayImageF::atClamped(int x, int y) const
{
    x = std::clamp(x, 0, _width - 1);
    y = std::clamp(y, 0, _height - 1);
    return at(x, y);
}

Image toGrayscale(const Image& img)
{
    if (img.channels() == 1)
        return img;
    Image out(img.width(), img.height(), 1);
    const auto src = img.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < dst.size(); ++i)
    {
        const unsigned r = src[3 * i];
        const unsigned g = src[3 * i + 1];
        const unsigned b = src[3 * i + 2];
        // integer form of round(0.299 R + 0.587 G + 0.114 B), exact half-up
        dst[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
    }
    return out;
}

GrayImageF toReal(const Image& gray)
{
    const Image g = gray.channels() == 1 ? gray : toGrayscale(gray);
    GrayImageF out(g.width(), g.height());
    std::copy(g.samples().begin(), g.samples().end(), out.data().begin());
    return out;
}

Image fromReal(const GrayImageF& img)
{
    Image out(img.width(), img.height(), 1);
    auto dst = out.samples();
    const auto src = img.data();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = roundToByte(src[i]);
    return out;
}

Image crop(const Image& img, const Roi& roi)
{
    if (!roi.isValidFor(img.size()))
        throw Error(ErrorCode::InvalidArgument,
                    "invalid roi (" + std::to_string(roi.x) + "," + std::to_string(roi.y) + "," + std::to_string(roi.w) +
                        "," + std::to_string(roi.h) + ") for " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()) + " image");
    Image out(roi.w, roi.h, img.channels());
    const int c = img.channels();
    for (int y = 0; y < roi.h; ++y)
    {
        const auto* row = &img.samples()[(static_cast<std::size_t>(roi.y + y) * img.width() + roi.x) * c];
        std::copy(row, row + static_cast<std::size_t>(roi.w) * c, &out.samples()[static_cast<std::size_t>(y) * roi.w * c]);
    }
    return out;
}

Image resizeCrop(const Image& img, const std::optional<Roi>& roi, const std::optional<Size>& target)
{
    Image cropped = roi ? crop(img, *roi) : img;
    if (!target)
        return cropped;
    if (target->width < 1 || target->height < 1)
        throw Error(ErrorCode::InvalidArgument, "target dimensions must be positive");
    if (target->width == cropped.width() && target->height == cropped.height())
        return cropped;

    const auto xt = bilinearTaps(cropped.width(), target->width);
    const auto yt = bilinearTaps(cropped.height(), target->height);
    const int c = cropped.channels();
    Image out(target->width, target->height, c);
    for (int y = 0; y < target->height; ++y)
    {
        const Tap& ty = yt[y];
        for (int x = 0; x < target->width; ++x)
        {
            const Tap& tx = xt[x];
            for (int k = 0; k < c; ++k)
            {
                const double top = cropped.at(tx.i0, ty.i0, k) * (1.0 - tx.w1) + cropped.at(tx.i1, ty.i0, k) * tx.w1;
                const double bottom = cropped.at(tx.i0, ty.i1, k) * (1.0 - tx.w1) + cropped.at(tx.i1, ty.i1, k) * tx.w1;
                out.at(x, y, k) = roundToByte(top * (1.0 - ty.w1) + bottom * ty.w1);
            }
        }
    }
    return out;
}

GrayImageF resizeBilinear(const GrayImageF& img, Size target)
{
    if (target.width < 1 || target.height < 1)
        throw Error(ErrorCode::InvalidArgument, "target dimensions must be positive");
    if (target == img.size())
        return img;
    const auto xt = bilinearTaps(img.width(), target.width);
    const auto yt = bilinearTaps(img.height(), target.height);
    GrayImageF out(target.width, target.height);
    for (int y = 0; y < target.height; ++y)
    {
        const Tap& ty = yt[y];
        for (int x = 0; x < target.width; ++x)
        {
            const Tap& tx = xt[x];
            const double top = img.at(tx.i0, ty.i0) * (1.0 - tx.w1) + img.at(tx.i1, ty.i0) * tx.w1;
            const double bottom = img.at(tx.i0, ty.i1) * (1.0 - tx.w1) + img.at(tx.i1, ty.i1) * tx.w1;
            out.at(x, y) = top * (1.0 - ty.w1) + bottom * ty.w1;
        }
    }
    return out;
}

GrayImageF downscaleBox(const GrayImageF& img, int factor)
{
    if (factor < 1)
        throw Error(ErrorCode::InvalidArgument, "downscale factor must be >= 1");
    if (factor == 1)
        return img;
    const int w = std::max(1, img.width() / factor);
    const int h = std::max(1, img.height() / factor);
    GrayImageF out(w, h);
    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            double sum = 0.0;
            int n = 0;
            for (int dy = 0; dy < factor; ++dy)
            {
                for (int dx = 0; dx < factor; ++dx)
                {
                    const int sx = x * factor + dx;
                    const int sy = y * factor + dy;
                    if (sx < img.width() && sy < img.height())
                    {
                        sum += img.at(sx, sy);
                        ++n;
                    }
                }
            }
            out.at(x, y) = sum / n;
        }
    }
    return out;
}

}  // namespace ivs::media

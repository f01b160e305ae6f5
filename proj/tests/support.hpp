#pragma once

// Shared fixtures for the unit and acceptance tests: seeded generators, synthetic sequences and
// brute-force reference kernels.

#include <ivs/eval/metrics.hpp>
#include <ivs/media/codec.hpp>
#include <ivs/media/frame_source.hpp>
#include <ivs/media/image.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace ivs::test {

class Rng
{
public:
    explicit Rng(std::uint64_t seed)
      : _gen(seed)
    {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(_gen); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(_gen); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(_gen); }
    std::mt19937_64& engine() { return _gen; }

private:
    std::mt19937_64 _gen;
};

inline media::GrayImageF noiseImage(int w, int h, Rng& rng, double lo = 0.0, double hi = 255.0)
{
    media::GrayImageF img(w, h);
    for (double& v : img.data())
        v = rng.real(lo, hi);
    return img;
}

/// Separable Gaussian with replicated borders, kernel radius ceil(3 sigma).
inline media::GrayImageF gaussianBlur(const media::GrayImageF& src, double sigma)
{
    if (sigma <= 0.0)
        return src;
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i)
        sum += k[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    for (double& v : k)
        v /= sum;
    media::GrayImageF tmp(src.width(), src.height()), out(src.width(), src.height());
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x)
        {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += k[i + r] * src.atClamped(x + i, y);
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x)
        {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += k[i + r] * tmp.atClamped(x, y + i);
            out.at(x, y) = acc;
        }
    return out;
}

/// Smooth random texture in [0, 255], large enough to crop moving views from.
inline media::GrayImageF textureImage(int w, int h, Rng& rng, double sigma = 1.5)
{
    auto img = gaussianBlur(noiseImage(w, h, rng), sigma);
    double lo = 1e300, hi = -1e300;
    for (double v : img.data())
    {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double& v : img.data())
        v = (v - lo) / (hi - lo) * 255.0;
    return img;
}

inline media::GrayImageF cropF(const media::GrayImageF& img, int x0, int y0, int w, int h)
{
    media::GrayImageF out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = img.at(x0 + x, y0 + y);
    return out;
}

inline media::Image toRgb(const media::GrayImageF& img)
{
    const media::Image gray = media::fromReal(img);
    media::Image rgb(gray.width(), gray.height(), 3);
    for (int y = 0; y < gray.height(); ++y)
        for (int x = 0; x < gray.width(); ++x)
            for (int c = 0; c < 3; ++c)
                rgb.at(x, y, c) = gray.at(x, y);
    return rgb;
}

/**
 * 60 crops of a texture advancing 4 px per frame, except frames 10..39 which all repeat frame 10
 * (the camera stops there). Frames are `size` square, RGB.
 */
inline std::vector<media::Image> stationarySequence(std::uint64_t seed, int frames = 60, int stillBegin = 10,
                                                    int stillEnd = 39, int size = 96, int speed = 4)
{
    Rng rng(seed);
    const int moving = frames - (stillEnd - stillBegin);
    const auto tex = textureImage(size + speed * moving + 8, size + 8, rng);
    std::vector<media::Image> out;
    int x = 0;
    for (int i = 0; i < frames; ++i)
    {
        out.push_back(toRgb(cropF(tex, x, 4, size, size)));
        if (i < stillBegin || i >= stillEnd)
            x += speed;
    }
    return out;
}

/// Camera x offset of each frame of stationarySequence().
inline std::vector<double> stationaryPositions(int frames = 60, int stillBegin = 10, int stillEnd = 39, int speed = 4)
{
    std::vector<double> out;
    int x = 0;
    for (int i = 0; i < frames; ++i)
    {
        out.push_back(x);
        if (i < stillBegin || i >= stillEnd)
            x += speed;
    }
    return out;
}

// Direct double-loop convolution with replicated borders.
media::GrayImageF convolve3(const media::GrayImageF& img, const double k[3][3])
{
    media::GrayImageF out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
        {
            double acc = 0.0;
            for (int j = -1; j <= 1; ++j)
                for (int i = -1; i <= 1; ++i)
                {
                    const int sx = std::clamp(x + i, 0, img.width() - 1);
                    const int sy = std::clamp(y + j, 0, img.height() - 1);
                    acc += k[j + 1][i + 1] * img.at(sx, sy);
                }
            out.at(x, y) = acc;
        }
    return out;
}

double tenengradOracle(const media::GrayImageF& img)
{
    const double gx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    const double gy[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    const auto a = convolve3(img, gx), b = convolve3(img, gy);
    double sum = 0.0;
    for (std::size_t i = 0; i < img.pixelCount(); ++i)
        sum += a.data()[i] * a.data()[i] + b.data()[i] * b.data()[i];
    return sum / static_cast<double>(img.pixelCount());
}

double laplacianOracle(const media::GrayImageF& img)
{
    const double k[3][3] = {{0, 1, 0}, {1, -4, 1}, {0, 1, 0}};
    const auto r = convolve3(img, k);
    double mean = 0.0;
    for (double v : r.data())
        mean += v;
    mean /= static_cast<double>(r.pixelCount());
    double var = 0.0;
    for (double v : r.data())
        var += (v - mean) * (v - mean);
    return var / static_cast<double>(r.pixelCount());
}

bool relClose(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

std::pair<media::GrayImageF, media::GrayImageF> shiftedPair(Rng& rng, int size, int dx, int dy)
{
    const auto tex = textureImage(size + 16, size + 16, rng, 1.0);
    // cur(x + dx, y + dy) = ref(x, y)
    return {cropF(tex, 8, 8, size, size), cropF(tex, 8 - dx, 8 - dy, size, size)};
}

double interiorMean(const std::vector<double>& field, int w, int h, int margin)
{
    double sum = 0.0;
    int n = 0;
    for (int y = margin; y < h - margin; ++y)
        for (int x = margin; x < w - margin; ++x)
        {
            sum += field[static_cast<std::size_t>(y) * w + x];
            ++n;
        }
    return sum / n;
}

/// RAII temporary directory.
class TempDir
{
public:
    explicit TempDir(const std::string& prefix = "ivs-test-")
      : _path(media::makeTempDirectory(prefix))
    {}
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return _path; }
    std::filesystem::path operator/(const std::string& name) const { return _path / name; }

private:
    std::filesystem::path _path;
};

inline void writeFolder(const std::filesystem::path& dir, const std::vector<media::Image>& frames,
                        const std::string& prefix = "img_")
{
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < frames.size(); ++i)
    {
        char name[64];
        std::snprintf(name, sizeof(name), "%s%04zu.png", prefix.c_str(), i);
        media::writePng(dir / name, frames[i]);
    }
}

inline std::string readText(const std::filesystem::path& p)
{
    const auto bytes = media::readFileBytes(p);
    return {bytes.begin(), bytes.end()};
}

inline void writeText(const std::filesystem::path& p, const std::string& text)
{
    media::writeFileBytes(p, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

inline Eigen::Matrix3d randomRotation(Rng& rng)
{
    Eigen::Quaterniond q(rng.real(-1, 1), rng.real(-1, 1), rng.real(-1, 1), rng.real(-1, 1));
    while (q.norm() < 1e-3)
        q = Eigen::Quaterniond(rng.real(-1, 1), rng.real(-1, 1), rng.real(-1, 1), rng.real(-1, 1));
    return q.normalized().toRotationMatrix();
}

inline eval::Trajectory randomTrajectory(Rng& rng, int n, double spread = 5.0)
{
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < n; ++i)
        pts.emplace_back(rng.real(-spread, spread), rng.real(-spread, spread), rng.real(-spread, spread));
    return eval::Trajectory::fromPositions(pts);
}

/// Random pair of depth maps, each pixel valid with probability pValid.
inline std::pair<eval::DepthMap, eval::DepthMap> randomDepthPair(Rng& rng, int w, int h, double pValid = 0.8)
{
    eval::DepthMap a(w, h), b(w, h);
    for (std::size_t i = 0; i < a.pixelCount(); ++i)
    {
        a.depth[i] = rng.real(0.5, 10.0);
        // mostly close ratios so every theta bucket is populated
        b.depth[i] = a.depth[i] * std::exp(rng.real(-0.6, 0.6));
        a.valid[i] = rng.real(0, 1) < pValid;
        b.valid[i] = rng.real(0, 1) < pValid;
        if (!a.valid[i])
            a.depth[i] = rng.coin() ? 0.0 : -1.0;
    }
    return {a, b};
}

/// Per-pixel reference for the depth accuracy metric.
inline double deltaOracle(const eval::DepthMap& d, const eval::DepthMap& g, double theta)
{
    long m = 0, good = 0;
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x)
        {
            const std::size_t i = static_cast<std::size_t>(y) * d.width + x;
            if (!d.valid[i] || !g.valid[i])
                continue;
            ++m;
            const double r1 = d.depth[i] / g.depth[i], r2 = g.depth[i] / d.depth[i];
            if ((r1 > r2 ? r1 : r2) < theta)
                ++good;
        }
    return static_cast<double>(good) / static_cast<double>(m);
}

/// Quantile by sorting and interpolating at (n - 1) q, written out longhand.
inline double quantileOracle(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = (static_cast<double>(v.size()) - 1.0) * q;
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

inline double stdDevOracle(const std::vector<double>& v)
{
    double sum = 0;
    for (double x : v)
        sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace ivs::test

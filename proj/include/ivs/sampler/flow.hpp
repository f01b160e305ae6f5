#pragma once

#include <ivs/media/image.hpp>

#include <vector>

namespace ivs::sampler {

/// Dense per-pixel displacement: cur(x + u, y + v) ~ ref(x, y).
struct FlowField
{
    int width = 0;
    int height = 0;
    std::vector<double> u;
    std::vector<double> v;

    double uAt(int x, int y) const { return u[static_cast<std::size_t>(y) * width + x]; }
    double vAt(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return u.size(); }
};

class FlowEstimator
{
public:
    virtual ~FlowEstimator() = default;

    /// Throws InvalidArgument when dimensions differ. Textureless input yields zero flow.
    virtual FlowField estimate(const media::GrayImageF& ref, const media::GrayImageF& cur) const = 0;
};

struct BlockMatchingParams
{
    int blockSize = 8;
    int searchRadius = 4;
    /// Pyramid levels are added while the halved image keeps min(width, height) >= this.
    int minLevelSize = 32;
};

/**
 * @brief Coarse-to-fine block matching with a sum-of-absolute-differences cost.
 *
 * The image is tiled into blockSize blocks at every pyramid level. Each block searches integer
 * displacements within searchRadius around the flow predicted by the coarser level (upscaled x2);
 * ties prefer the displacement closest to the prediction. Samples outside the image replicate the
 * border. Every pixel of a block receives the block's vector.
 */
class PyramidBlockMatcher final : public FlowEstimator
{
public:
    explicit PyramidBlockMatcher(BlockMatchingParams params = {});

    FlowField estimate(const media::GrayImageF& ref, const media::GrayImageF& cur) const override;

    const BlockMatchingParams& params() const { return _params; }

private:
    BlockMatchingParams _params;
};

FlowField denseFlow(const media::GrayImageF& ref, const media::GrayImageF& cur, const BlockMatchingParams& params = {});

/// Mean after dropping floor(trimFraction * n) values from each tail of the sorted data.
double trimmedMean(std::vector<double> values, double trimFraction);

/// Trimmed mean of the per-pixel flow magnitudes.
double movementScore(const FlowField& flow, double trimFraction);

}  // namespace ivs::sampler

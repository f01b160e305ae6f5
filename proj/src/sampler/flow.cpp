#include <ivs/sampler/flow.hpp>

#include <ivs/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ivs::sampler {

using media::GrayImageF;

namespace {

struct Vec2i
{
    int x = 0;
    int y = 0;
};

// Block vectors of one pyramid level.
struct BlockGrid
{
    int cols = 0;
    int rows = 0;
    int blockSize = 1;
    std::vector<Vec2i> vectors;

    Vec2i at(int bx, int by) const
    {
        bx = std::clamp(bx, 0, cols - 1);
        by = std::clamp(by, 0, rows - 1);
        return vectors[static_cast<std::size_t>(by) * cols + bx];
    }
};

double blockSad(const GrayImageF& ref, const GrayImageF& cur, int x0, int y0, int x1, int y1, int dx, int dy,
                double bestSoFar)
{
    double sad = 0.0;
    const bool inside = x0 + dx >= 0 && y0 + dy >= 0 && x1 + dx <= cur.width() && y1 + dy <= cur.height();
    for (int y = y0; y < y1; ++y)
    {
        if (inside)
        {
            for (int x = x0; x < x1; ++x)
                sad += std::abs(ref.at(x, y) - cur.at(x + dx, y + dy));
        }
        else
        {
            for (int x = x0; x < x1; ++x)
                sad += std::abs(ref.at(x, y) - cur.atClamped(x + dx, y + dy));
        }
        if (sad > bestSoFar)
            break;
    }
    return sad;
}

BlockGrid matchLevel(const GrayImageF& ref, const GrayImageF& cur, const BlockGrid* coarser, const BlockMatchingParams& p)
{
    BlockGrid grid;
    grid.blockSize = p.blockSize;
    grid.cols = (ref.width() + p.blockSize - 1) / p.blockSize;
    grid.rows = (ref.height() + p.blockSize - 1) / p.blockSize;
    grid.vectors.resize(static_cast<std::size_t>(grid.cols) * grid.rows);

    for (int by = 0; by < grid.rows; ++by)
    {
        const int y0 = by * p.blockSize;
        const int y1 = std::min(y0 + p.blockSize, ref.height());
        for (int bx = 0; bx < grid.cols; ++bx)
        {
            const int x0 = bx * p.blockSize;
            const int x1 = std::min(x0 + p.blockSize, ref.width());

            Vec2i predicted;
            if (coarser)
            {
                // block center in coarse pixel coordinates
                const int cx = ((x0 + x1) / 2) / 2;
                const int cy = ((y0 + y1) / 2) / 2;
                const Vec2i c = coarser->at(cx / coarser->blockSize, cy / coarser->blockSize);
                predicted = {2 * c.x, 2 * c.y};
            }

            Vec2i best = predicted;
            double bestSad = std::numeric_limits<double>::infinity();
            int bestDist = std::numeric_limits<int>::max();
            for (int dy = -p.searchRadius; dy <= p.searchRadius; ++dy)
            {
                for (int dx = -p.searchRadius; dx <= p.searchRadius; ++dx)
                {
                    const int dist = dx * dx + dy * dy;
                    const double sad =
                        blockSad(ref, cur, x0, y0, x1, y1, predicted.x + dx, predicted.y + dy,
                                 dist < bestDist ? bestSad : std::nextafter(bestSad, -1.0));
                    if (sad < bestSad || (sad == bestSad && dist < bestDist))
                    {
                        bestSad = sad;
                        bestDist = dist;
                        best = {predicted.x + dx, predicted.y + dy};
                    }
                }
            }
            grid.vectors[static_cast<std::size_t>(by) * grid.cols + bx] = best;
        }
    }
    return grid;
}

}  // namespace

PyramidBlockMatcher::PyramidBlockMatcher(BlockMatchingParams params)
  : _params(params)
{
    if (_params.blockSize < 1 || _params.searchRadius < 0 || _params.minLevelSize < 1)
        throw Error(ErrorCode::InvalidArgument, "invalid block matching parameters");
}

FlowField PyramidBlockMatcher::estimate(const GrayImageF& ref, const GrayImageF& cur) const
{
    if (ref.size() != cur.size())
        throw Error(ErrorCode::InvalidArgument, "flow inputs differ in size: " + std::to_string(ref.width()) + "x" +
                                                    std::to_string(ref.height()) + " vs " + std::to_string(cur.width()) +
                                                    "x" + std::to_string(cur.height()));
    if (ref.pixelCount() == 0)
        throw Error(ErrorCode::InvalidArgument, "empty flow input");

    std::vector<GrayImageF> refPyr{ref};
    std::vector<GrayImageF> curPyr{cur};
    while (std::min(refPyr.back().width(), refPyr.back().height()) / 2 >= _params.minLevelSize)
    {
        refPyr.push_back(media::downscaleBox(refPyr.back(), 2));
        curPyr.push_back(media::downscaleBox(curPyr.back(), 2));
    }

    BlockGrid grid;
    for (int level = static_cast<int>(refPyr.size()) - 1; level >= 0; --level)
    {
        const BlockGrid* coarser = level == static_cast<int>(refPyr.size()) - 1 ? nullptr : &grid;
        BlockGrid next = matchLevel(refPyr[level], curPyr[level], coarser, _params);
        grid = std::move(next);
    }

    FlowField flow;
    flow.width = ref.width();
    flow.height = ref.height();
    flow.u.resize(ref.pixelCount());
    flow.v.resize(ref.pixelCount());
    for (int y = 0; y < flow.height; ++y)
    {
        for (int x = 0; x < flow.width; ++x)
        {
            const Vec2i d = grid.at(x / grid.blockSize, y / grid.blockSize);
            const std::size_t i = static_cast<std::size_t>(y) * flow.width + x;
            flow.u[i] = d.x;
            flow.v[i] = d.y;
        }
    }
    return flow;
}

FlowField denseFlow(const GrayImageF& ref, const GrayImageF& cur, const BlockMatchingParams& params)
{
    return PyramidBlockMatcher(params).estimate(ref, cur);
}

double trimmedMean(std::vector<double> values, double trimFraction)
{
    if (values.empty())
        throw Error(ErrorCode::InvalidArgument, "trimmed mean of an empty set");
    if (!(trimFraction >= 0.0 && trimFraction < 0.5))
        throw Error(ErrorCode::InvalidArgument, "trim fraction must lie in [0, 0.5)");
    const std::size_t n = values.size();
    const auto drop = static_cast<std::size_t>(std::floor(trimFraction * static_cast<double>(n)));
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (std::size_t i = drop; i < n - drop; ++i)
        sum += values[i];
    return sum / static_cast<double>(n - 2 * drop);
}

double movementScore(const FlowField& flow, double trimFraction)
{
    if (flow.size() == 0)
        throw Error(ErrorCode::InvalidArgument, "empty flow field");
    std::vector<double> magnitudes(flow.size());
    for (std::size_t i = 0; i < flow.size(); ++i)
        magnitudes[i] = std::hypot(flow.u[i], flow.v[i]);
    return trimmedMean(std::move(magnitudes), trimFraction);
}

}  // namespace ivs::sampler

#pragma once

#include <ivs/core/plugin.hpp>
#include <ivs/sampler/focus.hpp>

#include <functional>
#include <map>
#include <mutex>
#include <span>

namespace ivs::sampler {

struct BlurParams
{
    FocusOperator op = FocusOperator::Tenengrad;
    int windowSize = 7;
    double threshold = 0.9;
    bool replace = false;
    int replaceWindow = 5;
    int maxDimension = 640;  ///< frames are scored at most this large; 0 keeps native size
    double gradientThreshold = 0.0;

    void validate() const;
};

/**
 * Relative sharpness of each entry: its score divided by the mean of the window of `windowSize`
 * entries centered on it (the entry itself included, truncated at the ends). A zero window mean
 * yields 1.
 */
std::vector<double> relativeSharpness(std::span<const double> scores, int windowSize);

using ScoreFn = std::function<double(core::FrameIndex)>;

/**
 * For each keyframe, the sharpest raw frame in the replaceWindow centered on it (clipped to the
 * bounds), ties to the lowest index. Collisions collapse to one keyframe.
 */
std::vector<core::FrameIndex> replaceWithSharpest(const std::vector<core::FrameIndex>& keyframes,
                                                  const core::Boundaries& bounds, int replaceWindow, const ScoreFn& score);

/// Memoized per-frame focus scores for one source and one scoring configuration.
class SharpnessScorer
{
public:
    SharpnessScorer(const media::FrameSource& source, const BlurParams& params);

    double operator()(core::FrameIndex index) const;

private:
    const media::FrameSource& _source;
    FocusOperator _op;
    int _maxDimension;
    double _gradientThreshold;
    mutable std::mutex _mutex;
    mutable std::map<core::FrameIndex, double> _cache;
};

/// Grayscale real-valued frame, shrunk so its larger side is at most maxDimension.
media::GrayImageF scoringInput(const media::Image& frame, int maxDimension);

/// Keeps frames whose relative sharpness exceeds the threshold; windows run over the selection.
core::KeyframeSet sampleSharp(const core::KeyframeSet& input, const ScoreFn& score, const BlurParams& params);
core::KeyframeSet sampleSharp(const core::KeyframeSet& input, const media::FrameSource& source, const BlurParams& params);

/// Result may contain frames outside the input selection, never outside its bounds.
core::KeyframeSet replaceBlurred(const core::KeyframeSet& keyframes, const ScoreFn& score, const BlurParams& params);
core::KeyframeSet replaceBlurred(const core::KeyframeSet& keyframes, const media::FrameSource& source,
                                 const BlurParams& params);

/// replace=false filters the selection; replace=true swaps keyframes for sharper neighbours.
class BlurPlugin final : public core::SamplerPlugin
{
public:
    BlurPlugin();

    std::string id() const override { return "blur"; }
    const core::ParamSchema& schema() const override { return _schema; }
    bool neighborhood(const core::Params& params) const override;
    std::vector<core::FrameIndex> sampleImages(const core::SampleContext& ctx, const core::Params& params) const override;

    static BlurParams fromParams(const core::Params& params);

private:
    core::ParamSchema _schema;
};

}  // namespace ivs::sampler

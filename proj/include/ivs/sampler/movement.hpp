#pragma once

#include <ivs/core/plugin.hpp>
#include <ivs/sampler/flow.hpp>

namespace ivs::sampler {

struct MovementParams
{
    double movementThreshold = 1.0;  ///< trimmed-mean flow, pixels at the downscaled resolution
    int resetDelta = 10;             ///< max input positions between reference and candidate
    int downscale = 1;
    double trimFraction = 0.05;      ///< per tail

    void validate() const;
};

/**
 * @brief Drops frames recorded while the camera was stationary.
 *
 * Walks the input selection in order. The first frame is selected and becomes the reference. A
 * later frame whose movement score against the reference reaches the threshold is selected and
 * becomes the new reference. When the candidate is more than resetDelta positions past the
 * reference without reaching the threshold, it becomes the reference without being selected.
 */
core::KeyframeSet sampleMovement(const core::KeyframeSet& input, const media::FrameSource& source,
                                 const MovementParams& params, const FlowEstimator& estimator,
                                 const core::ProgressFn& progress = {});

core::KeyframeSet sampleMovement(const core::KeyframeSet& input, const media::FrameSource& source,
                                 const MovementParams& params);

/// Grayscale, real-valued and box-downscaled frame as fed to the flow estimator.
media::GrayImageF flowInput(const media::Image& frame, int downscale);

/// Downscale factor suggested for a frame size; non-decreasing in both dimensions.
int suggestDownscale(media::Size resolution);

class CameraMovementPlugin final : public core::SamplerPlugin
{
public:
    CameraMovementPlugin();

    std::string id() const override { return "camera-movement"; }
    const core::ParamSchema& schema() const override { return _schema; }
    bool supportsHeuristics() const override { return true; }
    std::optional<core::Params> suggestSettings(const media::FrameSource& source, int budget) const override;
    std::vector<core::FrameIndex> sampleImages(const core::SampleContext& ctx, const core::Params& params) const override;

    static MovementParams fromParams(const core::Params& params);

private:
    core::ParamSchema _schema;
};

}  // namespace ivs::sampler

#include <ivs/sampler/movement.hpp>

#include <algorithm>
#include <cmath>

namespace ivs::sampler {

using core::ParamSpec;
using core::ParamType;

void MovementParams::validate() const
{
    if (!(movementThreshold >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "movement_threshold must be >= 0");
    if (resetDelta < 1)
        throw Error(ErrorCode::InvalidArgument, "reset_delta must be >= 1");
    if (downscale < 1)
        throw Error(ErrorCode::InvalidArgument, "downscale must be >= 1");
    if (!(trimFraction >= 0.0 && trimFraction < 0.5))
        throw Error(ErrorCode::InvalidArgument, "trim_fraction must lie in [0, 0.5)");
}

media::GrayImageF flowInput(const media::Image& frame, int downscale)
{
    return media::downscaleBox(media::toReal(media::toGrayscale(frame)), downscale);
}

core::KeyframeSet sampleMovement(const core::KeyframeSet& input, const media::FrameSource& source,
                                 const MovementParams& params, const FlowEstimator& estimator,
                                 const core::ProgressFn& progress)
{
    params.validate();
    const auto& frames = input.indices();
    if (frames.empty())
        throw Error(ErrorCode::InvalidArgument, "camera movement sampling needs a non-empty selection");

    std::vector<core::FrameIndex> selected{frames.front()};
    std::size_t refPos = 0;
    media::GrayImageF reference = flowInput(source.readFrame(frames.front()), params.downscale);

    for (std::size_t pos = 1; pos < frames.size(); ++pos)
    {
        media::GrayImageF candidate = flowInput(source.readFrame(frames[pos]), params.downscale);
        const double score = movementScore(estimator.estimate(reference, candidate), params.trimFraction);
        if (score >= params.movementThreshold)
        {
            selected.push_back(frames[pos]);
            reference = std::move(candidate);
            refPos = pos;
        }
        else if (pos - refPos > static_cast<std::size_t>(params.resetDelta))
        {
            reference = std::move(candidate);
            refPos = pos;
        }
        if (progress)
            progress(static_cast<double>(pos) / static_cast<double>(frames.size() - 1));
    }
    return core::KeyframeSet::fromIndices(std::move(selected), input.bounds());
}

core::KeyframeSet sampleMovement(const core::KeyframeSet& input, const media::FrameSource& source,
                                 const MovementParams& params)
{
    return sampleMovement(input, source, params, PyramidBlockMatcher());
}

int suggestDownscale(media::Size resolution)
{
    // about 480 px on the short side keeps the default block matcher's capture range useful
    const int shortSide = std::min(resolution.width, resolution.height);
    return std::max(1, static_cast<int>(std::floor(shortSide / 480.0 + 0.5)));
}

CameraMovementPlugin::CameraMovementPlugin()
  : _schema({
        ParamSpec{.name = "movement_threshold",
                  .type = ParamType::Number,
                  .defaultValue = 1.0,
                  .min = 0.0,
                  .description = "minimum trimmed-mean flow (px) to accept a frame"},
        ParamSpec{.name = "reset_delta",
                  .type = ParamType::Integer,
                  .defaultValue = 10,
                  .min = 1.0,
                  .description = "frames allowed between reference and candidate"},
        ParamSpec{.name = "downscale", .type = ParamType::Integer, .defaultValue = 1, .min = 1.0},
        ParamSpec{.name = "trim_fraction",
                  .type = ParamType::Number,
                  .defaultValue = 0.05,
                  .min = 0.0,
                  .max = 0.5,
                  .maxExclusive = true},
    })
{}

MovementParams CameraMovementPlugin::fromParams(const core::Params& params)
{
    MovementParams p;
    p.movementThreshold = params.value("movement_threshold", p.movementThreshold);
    p.resetDelta = params.value("reset_delta", p.resetDelta);
    p.downscale = params.value("downscale", p.downscale);
    p.trimFraction = params.value("trim_fraction", p.trimFraction);
    return p;
}

std::optional<core::Params> CameraMovementPlugin::suggestSettings(const media::FrameSource& source, int budget) const
{
    core::Params p = _schema.defaults();
    if (budget <= 0)
        return p;
    // one decoded frame is enough: only the resolution drives the suggestion
    const media::Size size = source.readFrame(0).size();
    p["downscale"] = suggestDownscale(size);
    return p;
}

std::vector<core::FrameIndex> CameraMovementPlugin::sampleImages(const core::SampleContext& ctx,
                                                                 const core::Params& params) const
{
    return sampleMovement(ctx.current, ctx.source, fromParams(params), PyramidBlockMatcher(), ctx.progress).indices();
}

}  // namespace ivs::sampler

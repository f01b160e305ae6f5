#include <ivs/sampler/nth_frame.hpp>

#include <cmath>

namespace ivs::sampler {

using core::FieldError;
using core::ParamSpec;
using core::ParamType;

core::KeyframeSet sampleNth(const core::KeyframeSet& input, std::int64_t step)
{
    if (step < 1)
        throw Error(ErrorCode::InvalidArgument, "step must be >= 1, got " + std::to_string(step));
    std::vector<core::FrameIndex> kept;
    const auto& idx = input.indices();
    kept.reserve(idx.size() / static_cast<std::size_t>(step) + 1);
    for (std::size_t i = 0; i < idx.size(); i += static_cast<std::size_t>(step))
        kept.push_back(idx[i]);
    return core::KeyframeSet::fromIndices(std::move(kept), input.bounds());
}

std::int64_t stepForFps(const media::Rational& nativeFps, const media::Rational& targetFps)
{
    const double native = nativeFps.value();
    const double target = targetFps.value();
    if (!(target > 0.0))
        throw Error(ErrorCode::InvalidArgument, "target fps must be positive");
    if (target > native)
        throw Error(ErrorCode::InvalidArgument, "target fps exceeds native fps");
    // exact rational ratio, rounded half-up
    const long double ratio = static_cast<long double>(nativeFps.num) * targetFps.den /
                              (static_cast<long double>(nativeFps.den) * targetFps.num);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(ratio + 0.5L)));
}

NthFramePlugin::NthFramePlugin()
  : _schema({
        ParamSpec{.name = "step", .type = ParamType::Integer, .min = 1.0, .description = "keep every step-th selected frame"},
        ParamSpec{.name = "target_fps",
                  .type = ParamType::Number,
                  .min = 0.0,
                  .minExclusive = true,
                  .description = "derive the step from the source frame rate"},
    })
{}

std::vector<FieldError> NthFramePlugin::validate(const core::Params& params) const
{
    auto errors = _schema.validate(params);
    if (params.is_object())
    {
        const bool hasStep = params.contains("step");
        const bool hasFps = params.contains("target_fps");
        if (hasStep && hasFps)
            errors.push_back({"target_fps", "mutually exclusive with step"});
        else if (!hasStep && !hasFps)
            errors.push_back({"step", "either step or target_fps is required"});
    }
    return errors;
}

std::vector<core::FrameIndex> NthFramePlugin::sampleImages(const core::SampleContext& ctx, const core::Params& params) const
{
    std::int64_t step = 1;
    if (params.contains("target_fps"))
    {
        const auto& fps = ctx.source.info().nativeFps;
        if (!fps)
            throw Error(ErrorCode::InvalidArgument, "target_fps requires a source with a known frame rate");
        step = stepForFps(*fps, media::Rational::fromDouble(params["target_fps"].get<double>()));
    }
    else
    {
        step = params["step"].get<std::int64_t>();
    }
    ctx.report(1.0);
    return sampleNth(ctx.current, step).indices();
}

}  // namespace ivs::sampler

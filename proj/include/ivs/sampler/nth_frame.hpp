#pragma once

#include <ivs/core/plugin.hpp>

namespace ivs::sampler {

/// Every step-th element of the selection, starting with its first element.
core::KeyframeSet sampleNth(const core::KeyframeSet& input, std::int64_t step);

/// max(1, round(native / target)); target must lie in (0, native].
std::int64_t stepForFps(const media::Rational& nativeFps, const media::Rational& targetFps);

/// Params: {"step": int} or {"target_fps": number}, mutually exclusive.
class NthFramePlugin final : public core::SamplerPlugin
{
public:
    NthFramePlugin();

    std::string id() const override { return "nth-frame"; }
    const core::ParamSchema& schema() const override { return _schema; }
    std::vector<core::FieldError> validate(const core::Params& params) const override;
    std::vector<core::FrameIndex> sampleImages(const core::SampleContext& ctx, const core::Params& params) const override;

private:
    core::ParamSchema _schema;
};

}  // namespace ivs::sampler

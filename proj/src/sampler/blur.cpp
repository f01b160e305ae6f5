#include <ivs/sampler/blur.hpp>

#include <algorithm>
#include <cmath>

namespace ivs::sampler {

using core::FrameIndex;
using core::ParamSpec;
using core::ParamType;

void BlurParams::validate() const
{
    if (windowSize < 3 || windowSize % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "window_size must be an odd integer >= 3");
    if (replaceWindow < 3 || replaceWindow % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "replace_window must be an odd integer >= 3");
    if (!(threshold > 0.0))
        throw Error(ErrorCode::InvalidArgument, "threshold must be > 0");
    if (maxDimension < 0)
        throw Error(ErrorCode::InvalidArgument, "max_dimension must be >= 0");
}

std::vector<double> relativeSharpness(std::span<const double> scores, int windowSize)
{
    const auto n = static_cast<std::ptrdiff_t>(scores.size());
    const std::ptrdiff_t half = windowSize / 2;
    std::vector<double> rel(scores.size());
    for (std::ptrdiff_t i = 0; i < n; ++i)
    {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
        double sum = 0.0;
        for (std::ptrdiff_t j = lo; j <= hi; ++j)
            sum += scores[j];
        const double mean = sum / static_cast<double>(hi - lo + 1);
        rel[i] = mean == 0.0 ? 1.0 : scores[i] / mean;
    }
    return rel;
}

std::vector<FrameIndex> replaceWithSharpest(const std::vector<FrameIndex>& keyframes, const core::Boundaries& bounds,
                                            int replaceWindow, const ScoreFn& score)
{
    const FrameIndex half = replaceWindow / 2;
    std::vector<FrameIndex> out;
    out.reserve(keyframes.size());
    for (FrameIndex k : keyframes)
    {
        const FrameIndex lo = std::max(bounds.start, k - half);
        const FrameIndex hi = std::min(bounds.end - 1, k + half);
        FrameIndex best = lo;
        double bestScore = score(lo);
        for (FrameIndex j = lo + 1; j <= hi; ++j)
        {
            const double s = score(j);
            if (s > bestScore)
            {
                bestScore = s;
                best = j;
            }
        }
        out.push_back(best);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

media::GrayImageF scoringInput(const media::Image& frame, int maxDimension)
{
    media::GrayImageF gray = media::toReal(media::toGrayscale(frame));
    const int largest = std::max(gray.width(), gray.height());
    if (maxDimension <= 0 || largest <= maxDimension)
        return gray;
    const double scale = static_cast<double>(maxDimension) / largest;
    const media::Size target{std::max(3, static_cast<int>(std::lround(gray.width() * scale))),
                             std::max(3, static_cast<int>(std::lround(gray.height() * scale)))};
    return media::resizeBilinear(gray, target);
}

SharpnessScorer::SharpnessScorer(const media::FrameSource& source, const BlurParams& params)
  : _source(source),
    _op(params.op),
    _maxDimension(params.maxDimension),
    _gradientThreshold(params.gradientThreshold)
{}

double SharpnessScorer::operator()(FrameIndex index) const
{
    {
        std::lock_guard lock(_mutex);
        if (auto it = _cache.find(index); it != _cache.end())
            return it->second;
    }
    const double value = focusMeasure(scoringInput(_source.readFrame(index), _maxDimension), _op, _gradientThreshold);
    std::lock_guard lock(_mutex);
    _cache.emplace(index, value);
    return value;
}

core::KeyframeSet sampleSharp(const core::KeyframeSet& input, const ScoreFn& score, const BlurParams& params)
{
    params.validate();
    if (input.empty())
        throw Error(ErrorCode::InvalidArgument, "blur sampling needs a non-empty selection");
    const auto& frames = input.indices();
    std::vector<double> scores(frames.size());
    std::transform(frames.begin(), frames.end(), scores.begin(), score);
    const auto rel = relativeSharpness(scores, params.windowSize);

    std::vector<FrameIndex> kept;
    for (std::size_t i = 0; i < frames.size(); ++i)
    {
        if (rel[i] > params.threshold)
            kept.push_back(frames[i]);
    }
    return core::KeyframeSet::fromIndices(std::move(kept), input.bounds());
}

core::KeyframeSet sampleSharp(const core::KeyframeSet& input, const media::FrameSource& source, const BlurParams& params)
{
    const SharpnessScorer scorer(source, params);
    return sampleSharp(input, std::cref(scorer), params);
}

core::KeyframeSet replaceBlurred(const core::KeyframeSet& keyframes, const ScoreFn& score, const BlurParams& params)
{
    params.validate();
    if (keyframes.empty())
        throw Error(ErrorCode::InvalidArgument, "blur replacement needs a non-empty keyframe set");
    return core::KeyframeSet::fromIndices(
        replaceWithSharpest(keyframes.indices(), keyframes.bounds(), params.replaceWindow, score), keyframes.bounds());
}

core::KeyframeSet replaceBlurred(const core::KeyframeSet& keyframes, const media::FrameSource& source,
                                 const BlurParams& params)
{
    const SharpnessScorer scorer(source, params);
    return replaceBlurred(keyframes, std::cref(scorer), params);
}

BlurPlugin::BlurPlugin()
  : _schema({
        ParamSpec{.name = "operator",
                  .type = ParamType::Enum,
                  .defaultValue = "tenengrad",
                  .choices = {"tenengrad", "laplacian_variance"}},
        ParamSpec{.name = "window_size", .type = ParamType::Integer, .defaultValue = 7, .min = 3.0, .oddOnly = true},
        ParamSpec{.name = "threshold",
                  .type = ParamType::Number,
                  .defaultValue = 0.9,
                  .min = 0.0,
                  .minExclusive = true,
                  .description = "minimum score relative to the window mean"},
        ParamSpec{.name = "replace",
                  .type = ParamType::Boolean,
                  .defaultValue = false,
                  .description = "replace keyframes by the sharpest neighbour instead of filtering"},
        ParamSpec{.name = "replace_window", .type = ParamType::Integer, .defaultValue = 5, .min = 3.0, .oddOnly = true},
        ParamSpec{.name = "max_dimension", .type = ParamType::Integer, .defaultValue = 640, .min = 0.0},
        ParamSpec{.name = "gradient_threshold", .type = ParamType::Number, .defaultValue = 0.0, .min = 0.0},
    })
{}

BlurParams BlurPlugin::fromParams(const core::Params& params)
{
    BlurParams p;
    p.op = focusOperatorFromString(params.value("operator", std::string("tenengrad")));
    p.windowSize = params.value("window_size", p.windowSize);
    p.threshold = params.value("threshold", p.threshold);
    p.replace = params.value("replace", p.replace);
    p.replaceWindow = params.value("replace_window", p.replaceWindow);
    p.maxDimension = params.value("max_dimension", p.maxDimension);
    p.gradientThreshold = params.value("gradient_threshold", p.gradientThreshold);
    return p;
}

bool BlurPlugin::neighborhood(const core::Params& params) const
{
    return params.is_object() && params.value("replace", false);
}

std::vector<FrameIndex> BlurPlugin::sampleImages(const core::SampleContext& ctx, const core::Params& params) const
{
    const BlurParams p = fromParams(params);
    const SharpnessScorer scorer(ctx.source, p);
    const std::size_t total = p.replace ? ctx.current.size() * static_cast<std::size_t>(p.replaceWindow)
                                        : ctx.current.size();
    std::size_t done = 0;
    const ScoreFn tracked = [&](FrameIndex i) {
        const double s = scorer(i);
        ctx.report(std::min(1.0, static_cast<double>(++done) / static_cast<double>(std::max<std::size_t>(1, total))));
        return s;
    };
    const auto result = p.replace ? replaceBlurred(ctx.current, tracked, p) : sampleSharp(ctx.current, tracked, p);
    ctx.report(1.0);
    return result.indices();
}

}  // namespace ivs::sampler

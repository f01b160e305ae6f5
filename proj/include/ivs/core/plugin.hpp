#pragma once

#include <ivs/core/keyframes.hpp>
#include <ivs/core/params.hpp>
#include <ivs/media/frame_source.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ivs::core {

/// Progress in [0, 1]; callers may ignore it.
using ProgressFn = std::function<void(double)>;

struct SampleContext
{
    const media::FrameSource& source;
    /// Frames visible to the plugin: the previous stage's selection inside the boundaries.
    const KeyframeSet& current;
    ProgressFn progress;

    void report(double fraction) const
    {
        if (progress)
            progress(fraction);
    }
};

/**
 * @brief Keyframe selection plugin.
 *
 * sampleImages() receives the current selection and returns keyframe indices. Unless the plugin
 * declares the neighborhood capability for the given params, every returned index must belong to
 * the current selection; with it, indices may be any frame inside the boundaries.
 */
class SamplerPlugin
{
public:
    virtual ~SamplerPlugin() = default;

    virtual std::string id() const = 0;
    virtual const ParamSchema& schema() const = 0;

    /// Schema checks plus plugin-specific cross-field rules.
    virtual std::vector<FieldError> validate(const Params& params) const { return schema().validate(params); }

    virtual bool neighborhood(const Params&) const { return false; }

    virtual bool supportsHeuristics() const { return false; }

    /// Parameter suggestions computed from at most `budget` frames; nullopt when unsupported.
    virtual std::optional<Params> suggestSettings(const media::FrameSource&, int /*budget*/) const { return std::nullopt; }

    /// `params` has defaults applied and has passed validate().
    virtual std::vector<FrameIndex> sampleImages(const SampleContext& ctx, const Params& params) const = 0;
};

struct TransformContext
{
    FrameIndex index = 0;
    std::filesystem::path framePath;
};

/**
 * @brief Plugin that derives additional images (e.g. masks) from one input image.
 */
class TransformPlugin
{
public:
    virtual ~TransformPlugin() = default;

    virtual std::string id() const = 0;
    virtual const ParamSchema& schema() const = 0;
    virtual std::vector<FieldError> validate(const Params& params) const { return schema().validate(params); }

    /// Serial transforms are funneled through a single lane by callers.
    virtual bool serial(const Params&) const { return false; }

    virtual std::vector<media::Image> transform(const media::Image& image, const TransformContext& ctx,
                                                const Params& params) const = 0;
};

class PluginRegistry
{
public:
    void add(std::shared_ptr<const SamplerPlugin> plugin);
    void add(std::shared_ptr<const TransformPlugin> plugin);

    /// nullptr when unknown.
    const SamplerPlugin* sampler(const std::string& id) const;
    const TransformPlugin* transform(const std::string& id) const;

    std::vector<std::string> samplerIds() const;
    std::vector<std::string> transformIds() const;

    nlohmann::json describe() const;

private:
    std::map<std::string, std::shared_ptr<const SamplerPlugin>> _samplers;
    std::map<std::string, std::shared_ptr<const TransformPlugin>> _transforms;
};

struct SamplerStep
{
    std::string pluginId;
    Params params = Params::object();

    bool operator==(const SamplerStep&) const = default;
};

/// Looks up and validates a step, returning its plugin and params with defaults applied.
std::pair<const SamplerPlugin*, Params> resolveSamplerStep(const SamplerStep& step, const PluginRegistry& registry);

/**
 * @brief Run one sampling stage on the current selection.
 *
 * The plugin output is normalized (sorted, deduplicated) and checked against the chaining contract;
 * violations raise PluginContract, plugin failures are rethrown as PluginRuntime naming the step.
 */
KeyframeSet runSampler(const SamplerStep& step, const media::FrameSource& source, const KeyframeSet& current,
                       const PluginRegistry& registry, ProgressFn progress = {});

/// Checks an arbitrary plugin output against the chaining contract. Used by runSampler.
KeyframeSet acceptSamplerOutput(const std::string& pluginId, std::vector<FrameIndex> output, const KeyframeSet& current,
                                bool neighborhood);

/// nullopt signals the plugin has no heuristic interface. Unknown ids throw.
std::optional<Params> suggestSettings(const std::string& pluginId, const media::FrameSource& source, int sampleBudget,
                                      const PluginRegistry& registry);

}  // namespace ivs::core

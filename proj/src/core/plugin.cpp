#include <ivs/core/plugin.hpp>

#include <algorithm>

namespace ivs::core {

void PluginRegistry::add(std::shared_ptr<const SamplerPlugin> plugin)
{
    const std::string id = plugin->id();
    _samplers[id] = std::move(plugin);
}

void PluginRegistry::add(std::shared_ptr<const TransformPlugin> plugin)
{
    const std::string id = plugin->id();
    _transforms[id] = std::move(plugin);
}

const SamplerPlugin* PluginRegistry::sampler(const std::string& id) const
{
    const auto it = _samplers.find(id);
    return it == _samplers.end() ? nullptr : it->second.get();
}

const TransformPlugin* PluginRegistry::transform(const std::string& id) const
{
    const auto it = _transforms.find(id);
    return it == _transforms.end() ? nullptr : it->second.get();
}

std::vector<std::string> PluginRegistry::samplerIds() const
{
    std::vector<std::string> ids;
    for (const auto& [id, _] : _samplers)
        ids.push_back(id);
    return ids;
}

std::vector<std::string> PluginRegistry::transformIds() const
{
    std::vector<std::string> ids;
    for (const auto& [id, _] : _transforms)
        ids.push_back(id);
    return ids;
}

nlohmann::json PluginRegistry::describe() const
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, p] : _samplers)
        out.push_back({{"id", id}, {"kind", "sampler"}, {"heuristics", p->supportsHeuristics()}, {"params", p->schema().toJson()}});
    for (const auto& [id, p] : _transforms)
        out.push_back({{"id", id}, {"kind", "transform"}, {"heuristics", false}, {"params", p->schema().toJson()}});
    return out;
}

std::pair<const SamplerPlugin*, Params> resolveSamplerStep(const SamplerStep& step, const PluginRegistry& registry)
{
    const SamplerPlugin* plugin = registry.sampler(step.pluginId);
    if (!plugin)
        throw Error(ErrorCode::UnknownPlugin, "unknown plugin '" + step.pluginId + "'");
    auto errors = plugin->validate(step.params);
    if (!errors.empty())
        throw ValidationError("invalid params for plugin '" + step.pluginId + "'", std::move(errors));
    return {plugin, plugin->schema().withDefaults(step.params)};
}

KeyframeSet acceptSamplerOutput(const std::string& pluginId, std::vector<FrameIndex> output, const KeyframeSet& current,
                                bool neighborhood)
{
    std::sort(output.begin(), output.end());
    output.erase(std::unique(output.begin(), output.end()), output.end());
    for (FrameIndex i : output)
    {
        if (!current.bounds().contains(i))
            throw Error(ErrorCode::PluginContract,
                        "plugin '" + pluginId + "' returned frame " + std::to_string(i) + " outside boundaries");
        if (!neighborhood && !current.contains(i))
            throw Error(ErrorCode::PluginContract,
                        "plugin '" + pluginId + "' returned frame " + std::to_string(i) + " which was not in its input selection");
    }
    return KeyframeSet::fromIndices(std::move(output), current.bounds());
}

KeyframeSet runSampler(const SamplerStep& step, const media::FrameSource& source, const KeyframeSet& current,
                       const PluginRegistry& registry, ProgressFn progress)
{
    const auto [plugin, params] = resolveSamplerStep(step, registry);
    current.bounds().validate(source.frameCount());

    std::vector<FrameIndex> output;
    try
    {
        const SampleContext ctx{source, current, std::move(progress)};
        output = plugin->sampleImages(ctx, params);
    }
    catch (const Error& e)
    {
        if (isValidationError(e.code()))
            throw;
        throw Error(ErrorCode::PluginRuntime, "plugin '" + step.pluginId + "' failed: " + e.what());
    }
    catch (const std::exception& e)
    {
        throw Error(ErrorCode::PluginRuntime, "plugin '" + step.pluginId + "' failed: " + e.what());
    }
    return acceptSamplerOutput(step.pluginId, std::move(output), current, plugin->neighborhood(params));
}

std::optional<Params> suggestSettings(const std::string& pluginId, const media::FrameSource& source, int sampleBudget,
                                      const PluginRegistry& registry)
{
    const SamplerPlugin* plugin = registry.sampler(pluginId);
    if (!plugin)
        throw Error(ErrorCode::UnknownPlugin, "unknown plugin '" + pluginId + "'");
    if (!plugin->supportsHeuristics())
        return std::nullopt;
    if (sampleBudget <= 0)
        return plugin->schema().defaults();
    return plugin->suggestSettings(source, sampleBudget);
}

}  // namespace ivs::core

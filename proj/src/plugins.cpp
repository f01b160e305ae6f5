#include <ivs/plugins.hpp>

#include <ivs/mask/semantic.hpp>
#include <ivs/sampler/blur.hpp>
#include <ivs/sampler/movement.hpp>
#include <ivs/sampler/nth_frame.hpp>

namespace ivs {

const core::PluginRegistry& builtinPlugins()
{
    static const core::PluginRegistry registry = [] {
        core::PluginRegistry r;
        r.add(std::make_shared<sampler::NthFramePlugin>());
        r.add(std::make_shared<sampler::CameraMovementPlugin>());
        r.add(std::make_shared<sampler::BlurPlugin>());
        r.add(std::make_shared<mask::SemanticMaskPlugin>());
        return r;
    }();
    return registry;
}

}  // namespace ivs

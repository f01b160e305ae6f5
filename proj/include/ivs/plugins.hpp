#pragma once

#include <ivs/core/plugin.hpp>

namespace ivs {

/// nth-frame, camera-movement, blur and semantic-mask.
const core::PluginRegistry& builtinPlugins();

}  // namespace ivs

#include <ivs/error.hpp>

namespace ivs {

std::string_view toString(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::OutOfRange: return "out_of_range";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::Io: return "io";
        case ErrorCode::Decode: return "decode";
        case ErrorCode::DecoderProcess: return "decoder_process";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::VersionMismatch: return "version_mismatch";
        case ErrorCode::Validation: return "validation";
        case ErrorCode::UnknownPlugin: return "unknown_plugin";
        case ErrorCode::PluginContract: return "plugin_contract";
        case ErrorCode::PluginRuntime: return "plugin_runtime";
        case ErrorCode::Protocol: return "protocol";
        case ErrorCode::AdapterUnavailable: return "adapter_unavailable";
        case ErrorCode::Degenerate: return "degenerate";
        case ErrorCode::Conflict: return "conflict";
    }
    return "unknown";
}

bool isValidationError(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::InvalidArgument:
        case ErrorCode::OutOfRange:
        case ErrorCode::Parse:
        case ErrorCode::VersionMismatch:
        case ErrorCode::Validation:
        case ErrorCode::UnknownPlugin:
            return true;
        default:
            return false;
    }
}

}  // namespace ivs

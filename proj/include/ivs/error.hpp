#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ivs {

enum class ErrorCode
{
    InvalidArgument,
    OutOfRange,
    NotFound,
    Io,
    Decode,
    DecoderProcess,
    Parse,
    VersionMismatch,
    Validation,
    UnknownPlugin,
    PluginContract,
    PluginRuntime,
    Protocol,
    AdapterUnavailable,
    Degenerate,
    Conflict,
};

std::string_view toString(ErrorCode code);

/// Base exception for every failure raised by the toolkit.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message),
        _code(code)
    {}

    ErrorCode code() const noexcept { return _code; }

private:
    ErrorCode _code;
};

/// True for errors caused by bad user input (schemas, params, ranges), as opposed to runtime failures.
bool isValidationError(ErrorCode code);

}  // namespace ivs

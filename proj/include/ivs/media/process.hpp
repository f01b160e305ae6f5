#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ivs::media {

struct ProcessResult
{
    int exitCode = -1;
    std::string out;
    std::string err;
};

/**
 * @brief Run argv[0] (searched on PATH) with the given arguments, feeding `input` to stdin.
 *
 * Blocks until the child exits. A child that cannot be executed reports exit code 127.
 */
ProcessResult runProcess(const std::vector<std::string>& argv, std::string_view input = {});

/// Whitespace split honoring single and double quotes; no other shell semantics.
std::vector<std::string> splitCommandLine(const std::string& command);

}  // namespace ivs::media

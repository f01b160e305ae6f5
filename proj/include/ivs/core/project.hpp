#pragma once

#include <ivs/core/keyframes.hpp>
#include <ivs/core/plugin.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ivs::core {

inline constexpr const char* kProjectVersion = "1.0.0";

struct ProjectSource
{
    std::string path;
    media::SourceKind kind = media::SourceKind::ImageFolder;
    std::optional<media::Rational> fps;

    bool operator==(const ProjectSource&) const = default;
};

/**
 * @brief Persistent project state: the source, the boundaries, the keyframes and the executed steps.
 *
 * Unknown top-level keys found on load are kept in `extra` and written back on save.
 */
struct ProjectFile
{
    std::string version = kProjectVersion;
    ProjectSource source;
    Boundaries boundaries;
    std::vector<FrameIndex> keyframes;
    std::vector<SamplerStep> steps;
    std::string createdAt;
    nlohmann::json extra = nlohmann::json::object();

    bool operator==(const ProjectFile&) const = default;
};

nlohmann::json toJson(const ProjectFile& project);
ProjectFile projectFromJson(const nlohmann::json& j);

/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string serializeProject(const ProjectFile& project);
ProjectFile parseProject(std::string_view text);

void saveProject(const ProjectFile& project, const std::filesystem::path& path);
ProjectFile loadProject(const std::filesystem::path& path);

/// Same major version as kProjectVersion.
bool isCompatibleVersion(const std::string& version);

/// UTC ISO-8601 timestamp; honors SOURCE_DATE_EPOCH for reproducible output.
std::string currentTimestamp();

/// Canonical JSON text used for every file the toolkit writes.
std::string canonicalDump(const nlohmann::json& j);

}  // namespace ivs::core

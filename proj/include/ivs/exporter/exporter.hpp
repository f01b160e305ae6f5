#pragma once

#include <ivs/core/keyframes.hpp>
#include <ivs/mask/semantic.hpp>
#include <ivs/media/frame_source.hpp>
#include <ivs/media/process.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ivs::exporter {

using core::FrameIndex;

struct ExportEntry
{
    FrameIndex index = 0;
    std::string file;  ///< relative to the export root
    std::string sha256;
    std::optional<std::string> mask;
    std::optional<std::string> maskSha256;

    bool operator==(const ExportEntry&) const = default;
};

struct ExportManifest
{
    std::filesystem::path root;
    std::vector<ExportEntry> frames;
    std::optional<media::Roi> roi;
    std::optional<media::Size> resolution;

    /// Serialized without `root`, so identical exports give identical manifests.
    nlohmann::json toJson() const;
    static ExportManifest fromJson(const nlohmann::json& j, std::filesystem::path root);

    static constexpr const char* kFileName = "manifest.json";
};

using MaskStore = std::map<FrameIndex, mask::BinaryMask>;

struct ExportOptions
{
    std::optional<media::Roi> roi;
    std::optional<media::Size> resolution;
    std::string naming = "frame_%06d.png";  ///< keyed by the original frame index
    const MaskStore* masks = nullptr;
};

/// printf-style single integer pattern, e.g. frame_%06d.png.
std::string formatFrameName(const std::string& pattern, FrameIndex index);

/**
 * @brief Writes `images/<name>` per keyframe, `masks/<name>.png` when masks are given, and
 * `manifest.json` under `outDir`.
 *
 * The crop precedes the resize; masks receive the same crop and a nearest-neighbour resize.
 * Previously exported PNGs in those directories are replaced. On a write failure every file of
 * this export is removed before the error propagates.
 */
ExportManifest exportImages(const core::KeyframeSet& keyframes, const media::FrameSource& source,
                            const std::filesystem::path& outDir, const ExportOptions& options = {});

/// Same geometric transform as the exported image, binary-preserving.
mask::BinaryMask transformMask(const mask::BinaryMask& m, const std::optional<media::Roi>& roi,
                               const std::optional<media::Size>& target);

/**
 * @brief Lays out `images/`, optional `masks/` (`<image file>.png`) and `project.ini` for COLMAP.
 *
 * Files are copied when the manifest root differs from `outDir`. Returns the project file path.
 */
std::filesystem::path emitColmapProject(const ExportManifest& manifest, const std::filesystem::path& outDir,
                                        bool withMasks);

/// Replaces `{project}`, `{images}` and `{masks}` in a command template.
std::string expandCommandTemplate(const std::string& tmpl, const std::filesystem::path& project,
                                  const std::filesystem::path& images, const std::filesystem::path& masks);

media::ProcessResult launchReconstruction(const std::string& tmpl, const std::filesystem::path& project,
                                          const std::filesystem::path& images, const std::filesystem::path& masks);

std::string sha256Hex(std::span<const std::uint8_t> bytes);
std::string sha256File(const std::filesystem::path& path);

}  // namespace ivs::exporter

#pragma once

#include <ivs/media/image.hpp>

#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ivs::media {

using FrameIndex = std::int64_t;

enum class SourceKind
{
    ImageFolder,
    Video,
};

std::string toString(SourceKind kind);
SourceKind sourceKindFromString(const std::string& s);

struct Rational
{
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;

    /// Accepts "30", "30/1", "30000/1001" or "29.97".
    static Rational parse(const std::string& text);
    /// Snaps NTSC-style rates (N*1000/1001) and near-integers, otherwise keeps millis.
    static Rational fromDouble(double value);
    std::string toString() const;
};

struct SourceInfo
{
    SourceKind kind = SourceKind::ImageFolder;
    std::filesystem::path origin;
    FrameIndex frameCount = 0;
    std::optional<Rational> nativeFps;
    Size resolution;
};

struct OpenOptions
{
    /// External decoder command, overrides IVS_DECODER and the bundled `ivs-decode`.
    std::optional<std::string> decoder;
    std::size_t cacheCapacity = 64;
    /// Where decoded video frames are dumped; a fresh temp directory when empty.
    std::filesystem::path scratchDir;
    /// Frame rate for sources that carry none (image folders); overrides the decoder's report.
    std::optional<Rational> fps;
};

/**
 * @brief Indexed access to the decoded frames of an image folder or a video.
 *
 * Video input is materialized by an external decoder invoked as
 * `decoder <input> <outdir> frame_%06d.png`, which dumps zero-based numbered PNG frames and may
 * print a JSON line `{"fps": "<num>/<den>"}` on stdout. The decoded frames then behave exactly like
 * an image folder. Reads are thread-safe and served through an LRU cache.
 */
class FrameSource
{
public:
    static std::shared_ptr<FrameSource> open(const std::filesystem::path& path, const OpenOptions& options = {});

    /// In-memory source, used for synthetic sequences. Reported as an image folder.
    static std::shared_ptr<FrameSource> fromImages(std::vector<Image> frames,
                                                   std::optional<Rational> fps = std::nullopt,
                                                   std::filesystem::path origin = "<memory>");

    ~FrameSource();
    FrameSource(const FrameSource&) = delete;
    FrameSource& operator=(const FrameSource&) = delete;

    const SourceInfo& info() const { return _info; }
    FrameIndex frameCount() const { return _info.frameCount; }

    /// Decoded RGB frame; repeated reads are bit-identical.
    Image readFrame(FrameIndex index) const;

    /// Backing file of a frame, empty for in-memory sources.
    std::filesystem::path framePath(FrameIndex index) const;

private:
    FrameSource() = default;

    Image decode(FrameIndex index) const;
    void checkIndex(FrameIndex index) const;

    SourceInfo _info;
    std::vector<std::filesystem::path> _files;
    std::vector<Image> _memory;
    std::filesystem::path _ownedScratch;

    std::size_t _cacheCapacity = 64;
    mutable std::mutex _cacheMutex;
    mutable std::list<FrameIndex> _lru;
    mutable std::unordered_map<FrameIndex, std::pair<std::shared_ptr<const Image>, std::list<FrameIndex>::iterator>> _cache;
};

/// Lexicographically sorted image files (png/jpg/jpeg) of a directory.
std::vector<std::filesystem::path> listImageFiles(const std::filesystem::path& dir);

/// Creates a unique directory under the system temp location.
std::filesystem::path makeTempDirectory(const std::string& prefix);

}  // namespace ivs::media

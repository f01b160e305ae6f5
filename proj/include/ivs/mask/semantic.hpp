#pragma once

#include <ivs/core/plugin.hpp>
#include <ivs/media/image.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace ivs::mask {

using ClassId = int;
using Palette = std::map<ClassId, std::string>;

/// The 19 Cityscapes train ids (0 road ... 18 bicycle).
const Palette& cityscapesPalette();

struct LabelMap
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;
    Palette palette;

    std::uint8_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }

    /// Throws Protocol when a pixel uses an id missing from the palette.
    void validate() const;
};

struct ClassSelection
{
    std::set<ClassId> excluded;

    /// Throws InvalidArgument for ids outside the palette.
    void validateFor(const Palette& palette) const;

    ClassSelection unite(const ClassSelection& other) const;
};

/// 0 marks pixels excluded from reconstruction, 255 the rest.
struct BinaryMask
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;

    media::Image toImage() const;
    static BinaryMask fromImage(const media::Image& img);

    bool operator==(const BinaryMask&) const = default;
};

/// Optional `dilationRadius` grows excluded regions by a disc of that radius.
BinaryMask labelmapToMask(const LabelMap& labels, const ClassSelection& selection, int dilationRadius = 0);

BinaryMask pixelwiseMin(const BinaryMask& a, const BinaryMask& b);

inline constexpr std::uint8_t kPreviewTint[3] = {255, 0, 0};
inline constexpr double kPreviewAlpha = 0.5;

/// Source image with excluded regions blended towards kPreviewTint.
media::Image maskPreview(const media::Image& img, const LabelMap& labels, const ClassSelection& selection);

struct InferenceRequest
{
    const media::Image& image;
    std::filesystem::path framePath;
};

/**
 * @brief Boundary to a segmentation backend: image in, label map plus palette out.
 */
class InferenceAdapter
{
public:
    virtual ~InferenceAdapter() = default;

    virtual const Palette& palette() const = 0;

    /// May return a lower resolution than the request; inferLabels() upscales.
    virtual LabelMap run(const InferenceRequest& request) const = 0;

    /// Serial adapters hold a single inference session; callers must not run them concurrently.
    virtual bool serial() const { return false; }
};

/// Label map at the image resolution (nearest-neighbour upscaled), validated against the palette.
LabelMap inferLabels(const media::Image& img, const InferenceAdapter& adapter, const std::filesystem::path& framePath = {});

/// Programmable adapter for tests; the default labels every pixel with `constant`.
class StubAdapter final : public InferenceAdapter
{
public:
    using Fn = std::function<LabelMap(const media::Image&)>;

    explicit StubAdapter(ClassId constant = 0, Palette palette = cityscapesPalette());
    StubAdapter(Fn fn, Palette palette);

    const Palette& palette() const override { return _palette; }
    LabelMap run(const InferenceRequest& request) const override;

private:
    Palette _palette;
    Fn _fn;
};

/// Reads pre-rendered `<frame stem>.labels.png` files, next to the frame or in `labelDir`.
class FileAdapter final : public InferenceAdapter
{
public:
    explicit FileAdapter(std::filesystem::path labelDir = {}, Palette palette = cityscapesPalette());

    const Palette& palette() const override { return _palette; }
    LabelMap run(const InferenceRequest& request) const override;

    static std::filesystem::path labelPathFor(const std::filesystem::path& framePath, const std::filesystem::path& labelDir);

private:
    std::filesystem::path _labelDir;
    Palette _palette;
};

/**
 * @brief External inference process.
 *
 * `command --handshake` prints one JSON line `{"palette": {"<id>": "<name>", ...}}`. Each inference
 * runs `command` with the frame as PNG on stdin and expects a single-channel PNG label map on stdout.
 */
class ProcessAdapter final : public InferenceAdapter
{
public:
    explicit ProcessAdapter(std::string command);

    const Palette& palette() const override { return _palette; }
    LabelMap run(const InferenceRequest& request) const override;
    bool serial() const override { return true; }

private:
    std::vector<std::string> _argv;
    Palette _palette;
    mutable std::mutex _lane;
};

/**
 * @brief Transform plugin turning a frame into its binary exclusion mask.
 *
 * Params: adapter (stub|file|process), command, label_dir, excluded (class ids), dilate, stub_label.
 */
class SemanticMaskPlugin final : public core::TransformPlugin
{
public:
    SemanticMaskPlugin();

    std::string id() const override { return "semantic-mask"; }
    const core::ParamSchema& schema() const override { return _schema; }
    std::vector<core::FieldError> validate(const core::Params& params) const override;
    bool serial(const core::Params& params) const override;
    std::vector<media::Image> transform(const media::Image& image, const core::TransformContext& ctx,
                                        const core::Params& params) const override;

    /// Adapter described by params; cached per configuration.
    std::shared_ptr<const InferenceAdapter> adapterFor(const core::Params& params) const;

    static ClassSelection selectionFrom(const core::Params& params);

private:
    core::ParamSchema _schema;
    mutable std::mutex _mutex;
    mutable std::map<std::string, std::shared_ptr<const InferenceAdapter>> _adapters;
};

}  // namespace ivs::mask

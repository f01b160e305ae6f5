#include <ivs/mask/semantic.hpp>

#include <ivs/error.hpp>
#include <ivs/media/codec.hpp>
#include <ivs/media/process.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fs = std::filesystem;

namespace ivs::mask {

using core::ParamSpec;
using core::ParamType;

const Palette& cityscapesPalette()
{
    static const Palette palette = {
        {0, "road"},        {1, "sidewalk"},    {2, "building"},   {3, "wall"},     {4, "fence"},
        {5, "pole"},        {6, "traffic light"}, {7, "traffic sign"}, {8, "vegetation"}, {9, "terrain"},
        {10, "sky"},        {11, "person"},     {12, "rider"},     {13, "car"},     {14, "truck"},
        {15, "bus"},        {16, "train"},      {17, "motorcycle"}, {18, "bicycle"},
    };
    return palette;
}

void LabelMap::validate() const
{
    if (width < 1 || height < 1 || labels.size() != static_cast<std::size_t>(width) * height)
        throw Error(ErrorCode::Protocol, "label map dimensions do not match its buffer");
    bool seen[256] = {};
    for (std::uint8_t id : labels)
        seen[id] = true;
    for (int id = 0; id < 256; ++id)
    {
        if (seen[id] && !palette.count(id))
            throw Error(ErrorCode::Protocol, "label map uses class id " + std::to_string(id) + " missing from the palette");
    }
}

void ClassSelection::validateFor(const Palette& palette) const
{
    for (ClassId id : excluded)
    {
        if (!palette.count(id))
            throw Error(ErrorCode::InvalidArgument, "class id " + std::to_string(id) + " is not in the palette");
    }
}

ClassSelection ClassSelection::unite(const ClassSelection& other) const
{
    ClassSelection out = *this;
    out.excluded.insert(other.excluded.begin(), other.excluded.end());
    return out;
}

media::Image BinaryMask::toImage() const
{
    return media::Image(width, height, 1, values);
}

BinaryMask BinaryMask::fromImage(const media::Image& img)
{
    const media::Image gray = media::toGrayscale(img);
    BinaryMask m{gray.width(), gray.height(), {}};
    m.values.resize(gray.samples().size());
    std::transform(gray.samples().begin(), gray.samples().end(), m.values.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v >= 128 ? 255 : 0); });
    return m;
}

BinaryMask labelmapToMask(const LabelMap& labels, const ClassSelection& selection, int dilationRadius)
{
    if (dilationRadius < 0)
        throw Error(ErrorCode::InvalidArgument, "dilation radius must be >= 0");
    BinaryMask mask{labels.width, labels.height, std::vector<std::uint8_t>(labels.labels.size())};
    for (std::size_t i = 0; i < labels.labels.size(); ++i)
        mask.values[i] = selection.excluded.count(labels.labels[i]) ? 0 : 255;
    if (dilationRadius == 0)
        return mask;

    BinaryMask grown = mask;
    const int r = dilationRadius;
    for (int y = 0; y < mask.height; ++y)
    {
        for (int x = 0; x < mask.width; ++x)
        {
            if (mask.values[static_cast<std::size_t>(y) * mask.width + x] != 0)
                continue;
            for (int dy = -r; dy <= r; ++dy)
            {
                for (int dx = -r; dx <= r; ++dx)
                {
                    const int nx = x + dx, ny = y + dy;
                    if (dx * dx + dy * dy > r * r || nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height)
                        continue;
                    grown.values[static_cast<std::size_t>(ny) * mask.width + nx] = 0;
                }
            }
        }
    }
    return grown;
}

BinaryMask pixelwiseMin(const BinaryMask& a, const BinaryMask& b)
{
    if (a.width != b.width || a.height != b.height)
        throw Error(ErrorCode::InvalidArgument, "mask dimensions differ");
    BinaryMask out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = std::min(a.values[i], b.values[i]);
    return out;
}

media::Image maskPreview(const media::Image& img, const LabelMap& labels, const ClassSelection& selection)
{
    if (img.width() != labels.width || img.height() != labels.height)
        throw Error(ErrorCode::InvalidArgument, "preview image and label map differ in size");
    media::Image rgb = img;
    if (img.channels() == 1)
    {
        rgb = media::Image(img.width(), img.height(), 3);
        for (std::size_t i = 0; i < img.samples().size(); ++i)
            rgb.samples()[3 * i] = rgb.samples()[3 * i + 1] = rgb.samples()[3 * i + 2] = img.samples()[i];
    }
    for (int y = 0; y < rgb.height(); ++y)
    {
        for (int x = 0; x < rgb.width(); ++x)
        {
            if (!selection.excluded.count(labels.at(x, y)))
                continue;
            for (int c = 0; c < 3; ++c)
            {
                const double blended = (1.0 - kPreviewAlpha) * rgb.at(x, y, c) + kPreviewAlpha * kPreviewTint[c];
                rgb.at(x, y, c) = static_cast<std::uint8_t>(std::floor(blended + 0.5));
            }
        }
    }
    return rgb;
}

LabelMap inferLabels(const media::Image& img, const InferenceAdapter& adapter, const fs::path& framePath)
{
    LabelMap raw = adapter.run({img, framePath});
    raw.palette = adapter.palette();
    raw.validate();
    if (raw.width == img.width() && raw.height == img.height())
        return raw;

    LabelMap up{img.width(), img.height(), std::vector<std::uint8_t>(static_cast<std::size_t>(img.width()) * img.height()),
                raw.palette};
    for (int y = 0; y < up.height; ++y)
    {
        const int sy = std::min(raw.height - 1, static_cast<int>((y + 0.5) * raw.height / up.height));
        for (int x = 0; x < up.width; ++x)
        {
            const int sx = std::min(raw.width - 1, static_cast<int>((x + 0.5) * raw.width / up.width));
            up.labels[static_cast<std::size_t>(y) * up.width + x] = raw.at(sx, sy);
        }
    }
    return up;
}

StubAdapter::StubAdapter(ClassId constant, Palette palette)
  : _palette(std::move(palette))
{
    _fn = [constant, palette = _palette](const media::Image& img) {
        return LabelMap{img.width(), img.height(),
                        std::vector<std::uint8_t>(static_cast<std::size_t>(img.width()) * img.height(),
                                                  static_cast<std::uint8_t>(constant)),
                        palette};
    };
}

StubAdapter::StubAdapter(Fn fn, Palette palette)
  : _palette(std::move(palette)),
    _fn(std::move(fn))
{}

LabelMap StubAdapter::run(const InferenceRequest& request) const
{
    return _fn(request.image);
}

FileAdapter::FileAdapter(fs::path labelDir, Palette palette)
  : _labelDir(std::move(labelDir)),
    _palette(std::move(palette))
{}

fs::path FileAdapter::labelPathFor(const fs::path& framePath, const fs::path& labelDir)
{
    const fs::path dir = labelDir.empty() ? framePath.parent_path() : labelDir;
    return dir / (framePath.stem().string() + ".labels.png");
}

LabelMap FileAdapter::run(const InferenceRequest& request) const
{
    if (request.framePath.empty())
        throw Error(ErrorCode::AdapterUnavailable, "file adapter needs frames backed by files");
    const fs::path path = labelPathFor(request.framePath, _labelDir);
    if (!fs::exists(path))
        throw Error(ErrorCode::AdapterUnavailable, "label file not found: " + path.string());
    const media::Image img = media::readImage(path, media::ColorMode::Gray);
    return LabelMap{img.width(), img.height(), {img.samples().begin(), img.samples().end()}, _palette};
}

ProcessAdapter::ProcessAdapter(std::string command)
  : _argv(media::splitCommandLine(command))
{
    if (_argv.empty())
        throw Error(ErrorCode::AdapterUnavailable, "empty inference command");
    auto argv = _argv;
    argv.push_back("--handshake");
    const auto res = media::runProcess(argv);
    if (res.exitCode != 0)
        throw Error(ErrorCode::AdapterUnavailable,
                    "inference handshake failed (exit " + std::to_string(res.exitCode) + "): " + res.err);
    const std::string line = res.out.substr(0, res.out.find('\n'));
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("palette") || !j["palette"].is_object())
        throw Error(ErrorCode::Protocol, "inference handshake must be a JSON line with a palette object");
    for (const auto& [key, value] : j["palette"].items())
    {
        char* end = nullptr;
        const long id = std::strtol(key.c_str(), &end, 10);
        if (*end != '\0' || id < 0 || id > 255 || !value.is_string())
            throw Error(ErrorCode::Protocol, "invalid palette entry '" + key + "'");
        _palette[static_cast<ClassId>(id)] = value.get<std::string>();
    }
}

LabelMap ProcessAdapter::run(const InferenceRequest& request) const
{
    const auto png = media::encodePng(request.image);
    media::ProcessResult res;
    {
        std::lock_guard lock(_lane);
        res = media::runProcess(_argv, std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
    }
    if (res.exitCode != 0)
        throw Error(ErrorCode::AdapterUnavailable,
                    "inference process failed (exit " + std::to_string(res.exitCode) + "): " + res.err);
    media::Image labels;
    try
    {
        labels = media::decodeImage(
            std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(res.out.data()), res.out.size()),
            media::ColorMode::Unchanged);
    }
    catch (const Error& e)
    {
        throw Error(ErrorCode::Protocol, std::string("inference output is not a PNG: ") + e.what());
    }
    if (labels.channels() != 1)
        throw Error(ErrorCode::Protocol, "inference output must be a single-channel label map");
    return LabelMap{labels.width(), labels.height(), {labels.samples().begin(), labels.samples().end()}, _palette};
}

SemanticMaskPlugin::SemanticMaskPlugin()
  : _schema({
        ParamSpec{.name = "adapter", .type = ParamType::Enum, .defaultValue = "file", .choices = {"stub", "file", "process"}},
        ParamSpec{.name = "command", .type = ParamType::String, .description = "inference command for the process adapter"},
        ParamSpec{.name = "label_dir", .type = ParamType::String, .description = "directory of <frame>.labels.png files"},
        ParamSpec{.name = "excluded",
                  .type = ParamType::IntegerList,
                  .defaultValue = nlohmann::json::array({11, 12, 13, 14, 15, 16, 17, 18}),
                  .description = "class ids masked out"},
        ParamSpec{.name = "dilate", .type = ParamType::Integer, .defaultValue = 0, .min = 0.0},
        ParamSpec{.name = "stub_label", .type = ParamType::Integer, .defaultValue = 0, .min = 0.0, .max = 255.0},
    })
{}

std::vector<core::FieldError> SemanticMaskPlugin::validate(const core::Params& params) const
{
    auto errors = _schema.validate(params);
    if (errors.empty() && params.value("adapter", std::string("file")) == "process" && !params.contains("command"))
        errors.push_back({"command", "required for the process adapter"});
    return errors;
}

bool SemanticMaskPlugin::serial(const core::Params& params) const
{
    return params.value("adapter", std::string("file")) == "process";
}

std::shared_ptr<const InferenceAdapter> SemanticMaskPlugin::adapterFor(const core::Params& params) const
{
    const std::string kind = params.value("adapter", std::string("file"));
    std::string key = kind;
    if (kind == "process")
        key += ":" + params.value("command", std::string());
    else if (kind == "file")
        key += ":" + params.value("label_dir", std::string());
    else
        key += ":" + std::to_string(params.value("stub_label", 0));

    std::lock_guard lock(_mutex);
    if (auto it = _adapters.find(key); it != _adapters.end())
        return it->second;
    std::shared_ptr<const InferenceAdapter> adapter;
    if (kind == "process")
        adapter = std::make_shared<ProcessAdapter>(params.value("command", std::string()));
    else if (kind == "file")
        adapter = std::make_shared<FileAdapter>(params.value("label_dir", std::string()));
    else
        adapter = std::make_shared<StubAdapter>(params.value("stub_label", 0));
    _adapters.emplace(key, adapter);
    return adapter;
}

ClassSelection SemanticMaskPlugin::selectionFrom(const core::Params& params)
{
    ClassSelection sel;
    if (params.contains("excluded"))
    {
        for (const auto& id : params["excluded"])
            sel.excluded.insert(id.get<ClassId>());
    }
    return sel;
}

std::vector<media::Image> SemanticMaskPlugin::transform(const media::Image& image, const core::TransformContext& ctx,
                                                        const core::Params& params) const
{
    const auto adapter = adapterFor(params);
    const ClassSelection sel = selectionFrom(params);
    sel.validateFor(adapter->palette());
    const LabelMap labels = inferLabels(image, *adapter, ctx.framePath);
    return {labelmapToMask(labels, sel, params.value("dilate", 0)).toImage()};
}

}  // namespace ivs::mask

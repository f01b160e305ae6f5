#include <ivs/exporter/exporter.hpp>

#include <ivs/core/project.hpp>
#include <ivs/error.hpp>
#include <ivs/media/codec.hpp>

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <regex>

namespace fs = std::filesystem;

namespace ivs::exporter {

namespace {

nlohmann::json roiToJson(const std::optional<media::Roi>& roi)
{
    if (!roi)
        return nullptr;
    return {{"x", roi->x}, {"y", roi->y}, {"w", roi->w}, {"h", roi->h}};
}

nlohmann::json sizeToJson(const std::optional<media::Size>& size)
{
    if (!size)
        return nullptr;
    return {{"width", size->width}, {"height", size->height}};
}

void clearPngs(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        return;
    for (const auto& entry : fs::directory_iterator(dir))
    {
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            fs::remove(entry.path());
    }
}

std::string writeAndHash(const fs::path& path, const std::vector<std::uint8_t>& bytes)
{
    media::writeFileBytes(path, bytes);
    return sha256Hex(bytes);
}

void copyFile(const fs::path& from, const fs::path& to)
{
    std::error_code ec;
    if (fs::exists(to) && fs::equivalent(from, to, ec))
        return;
    fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
    if (ec)
        throw Error(ErrorCode::Io, "copy " + from.string() + " -> " + to.string() + " failed: " + ec.message());
}

}  // namespace

nlohmann::json ExportManifest::toJson() const
{
    nlohmann::json frames_ = nlohmann::json::array();
    for (const auto& e : frames)
    {
        nlohmann::json f = {{"index", e.index}, {"file", e.file}, {"sha256", e.sha256}};
        if (e.mask)
        {
            f["mask"] = *e.mask;
            f["mask_sha256"] = *e.maskSha256;
        }
        frames_.push_back(std::move(f));
    }
    return {{"frames", frames_}, {"roi", roiToJson(roi)}, {"resolution", sizeToJson(resolution)}};
}

ExportManifest ExportManifest::fromJson(const nlohmann::json& j, fs::path root)
{
    ExportManifest m;
    m.root = std::move(root);
    try
    {
        for (const auto& f : j.at("frames"))
        {
            ExportEntry e{f.at("index").get<FrameIndex>(), f.at("file").get<std::string>(),
                          f.at("sha256").get<std::string>(), std::nullopt, std::nullopt};
            if (f.contains("mask"))
            {
                e.mask = f["mask"].get<std::string>();
                e.maskSha256 = f.at("mask_sha256").get<std::string>();
            }
            m.frames.push_back(std::move(e));
        }
        if (j.contains("roi") && !j["roi"].is_null())
        {
            const auto& r = j["roi"];
            m.roi = media::Roi{r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(), r.at("h").get<int>()};
        }
        if (j.contains("resolution") && !j["resolution"].is_null())
            m.resolution = media::Size{j["resolution"].at("width").get<int>(), j["resolution"].at("height").get<int>()};
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(ErrorCode::Parse, std::string("malformed manifest: ") + e.what());
    }
    return m;
}

std::string formatFrameName(const std::string& pattern, FrameIndex index)
{
    static const std::regex valid(R"(^[^%/]*%0?[0-9]*(d|lld)[^%/]*$)");
    if (!std::regex_match(pattern, valid))
        throw Error(ErrorCode::InvalidArgument, "naming pattern must contain exactly one integer field: " + pattern);
    std::string fmt = pattern;
    if (fmt.find("lld") == std::string::npos)
        fmt.insert(fmt.find('d', fmt.find('%')), "ll");
    char buf[512];
    std::snprintf(buf, sizeof(buf), fmt.c_str(), static_cast<long long>(index));
    return buf;
}

mask::BinaryMask transformMask(const mask::BinaryMask& m, const std::optional<media::Roi>& roi,
                               const std::optional<media::Size>& target)
{
    const media::Image img = m.toImage();
    const media::Image cropped = roi ? media::crop(img, *roi) : img;
    if (!target || (target->width == cropped.width() && target->height == cropped.height()))
        return mask::BinaryMask::fromImage(cropped);
    if (target->width < 1 || target->height < 1)
        throw Error(ErrorCode::InvalidArgument, "target dimensions must be positive");

    mask::BinaryMask out{target->width, target->height,
                         std::vector<std::uint8_t>(static_cast<std::size_t>(target->width) * target->height)};
    for (int y = 0; y < target->height; ++y)
    {
        const int sy = std::min(cropped.height() - 1, static_cast<int>((y + 0.5) * cropped.height() / target->height));
        for (int x = 0; x < target->width; ++x)
        {
            const int sx = std::min(cropped.width() - 1, static_cast<int>((x + 0.5) * cropped.width() / target->width));
            out.values[static_cast<std::size_t>(y) * target->width + x] = cropped.at(sx, sy);
        }
    }
    return out;
}

ExportManifest exportImages(const core::KeyframeSet& keyframes, const media::FrameSource& source, const fs::path& outDir,
                            const ExportOptions& options)
{
    if (keyframes.empty())
        throw Error(ErrorCode::InvalidArgument, "no keyframes to export");
    if (options.roi && !options.roi->isValidFor(source.info().resolution))
        throw Error(ErrorCode::InvalidArgument, "export roi does not fit the source resolution");
    if (options.resolution && (options.resolution->width < 1 || options.resolution->height < 1))
        throw Error(ErrorCode::InvalidArgument, "export resolution must be positive");

    const fs::path imagesDir = outDir / "images";
    const fs::path masksDir = outDir / "masks";
    std::error_code ec;
    fs::create_directories(imagesDir, ec);
    if (ec)
        throw Error(ErrorCode::Io, "cannot create " + imagesDir.string() + ": " + ec.message());
    clearPngs(imagesDir);
    if (options.masks)
    {
        fs::create_directories(masksDir);
        clearPngs(masksDir);
    }

    ExportManifest manifest;
    manifest.root = outDir;
    manifest.roi = options.roi;
    manifest.resolution = options.resolution;

    std::vector<fs::path> written;
    try
    {
        for (FrameIndex index : keyframes.indices())
        {
            const media::Image frame = source.readFrame(index);
            const media::Image out = media::resizeCrop(frame, options.roi, options.resolution);
            const std::string name = formatFrameName(options.naming, index);

            ExportEntry entry;
            entry.index = index;
            entry.file = "images/" + name;
            written.push_back(outDir / entry.file);
            entry.sha256 = writeAndHash(written.back(), media::encodePng(out));

            if (options.masks)
            {
                if (const auto it = options.masks->find(index); it != options.masks->end())
                {
                    const auto& m = it->second;
                    if (m.width != frame.width() || m.height != frame.height())
                        throw Error(ErrorCode::InvalidArgument,
                                    "mask of frame " + std::to_string(index) + " does not match the frame size");
                    const auto transformed = transformMask(m, options.roi, options.resolution);
                    entry.mask = "masks/" + name + ".png";
                    written.push_back(outDir / *entry.mask);
                    entry.maskSha256 = writeAndHash(written.back(), media::encodePng(transformed.toImage()));
                }
            }
            manifest.frames.push_back(std::move(entry));
        }
        const std::string text = core::canonicalDump(manifest.toJson());
        written.push_back(outDir / ExportManifest::kFileName);
        media::writeFileBytes(written.back(), {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    }
    catch (...)
    {
        for (const auto& p : written)
            fs::remove(p, ec);
        throw;
    }
    return manifest;
}

fs::path emitColmapProject(const ExportManifest& manifest, const fs::path& outDir, bool withMasks)
{
    if (manifest.frames.empty())
        throw Error(ErrorCode::InvalidArgument, "cannot emit a reconstruction project for an empty export");

    if (withMasks)
    {
        for (const auto& e : manifest.frames)
        {
            if (!e.mask || !fs::exists(manifest.root / *e.mask))
                throw Error(ErrorCode::NotFound, "missing mask for exported frame " + e.file + " (index " +
                                                     std::to_string(e.index) + ")");
        }
    }

    const fs::path root = fs::absolute(outDir).lexically_normal();
    const fs::path imagesDir = root / "images";
    const fs::path masksDir = root / "masks";
    fs::create_directories(imagesDir);
    if (withMasks)
        fs::create_directories(masksDir);

    for (const auto& e : manifest.frames)
    {
        const fs::path image = fs::path(e.file).filename();
        copyFile(manifest.root / e.file, imagesDir / image);
        if (withMasks)
            copyFile(manifest.root / *e.mask, masksDir / (image.string() + ".png"));
    }

    std::string ini;
    ini += "database_path=" + (root / "database.db").string() + "\n";
    ini += "image_path=" + imagesDir.string() + "\n";
    ini += "[ImageReader]\n";
    if (withMasks)
        ini += "mask_path=" + masksDir.string() + "\n";
    ini += "single_camera=true\n";

    const fs::path project = root / "project.ini";
    media::writeFileBytes(project, {reinterpret_cast<const std::uint8_t*>(ini.data()), ini.size()});
    return project;
}

std::string expandCommandTemplate(const std::string& tmpl, const fs::path& project, const fs::path& images,
                                  const fs::path& masks)
{
    std::string out = tmpl;
    const std::pair<std::string, std::string> subs[] = {
        {"{project}", project.string()}, {"{images}", images.string()}, {"{masks}", masks.string()}};
    for (const auto& [key, value] : subs)
    {
        for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size()))
            out.replace(pos, key.size(), value);
    }
    return out;
}

media::ProcessResult launchReconstruction(const std::string& tmpl, const fs::path& project, const fs::path& images,
                                          const fs::path& masks)
{
    // substitute after splitting so paths with spaces stay single arguments
    std::vector<std::string> argv;
    for (const auto& part : media::splitCommandLine(tmpl))
        argv.push_back(expandCommandTemplate(part, project, images, masks));
    return media::runProcess(argv);
}

std::string sha256Hex(std::span<const std::uint8_t> bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::Io, "sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i)
    {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string sha256File(const fs::path& path)
{
    return sha256Hex(media::readFileBytes(path));
}

}  // namespace ivs::exporter

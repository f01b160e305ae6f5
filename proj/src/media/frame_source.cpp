#include <ivs/media/frame_source.hpp>

#include <ivs/error.hpp>
#include <ivs/media/codec.hpp>
#include <ivs/media/process.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;

namespace ivs::media {

namespace {

constexpr const char* kFramePattern = "frame_%06d.png";

std::vector<std::string> resolveDecoder(const OpenOptions& options)
{
    if (options.decoder && !options.decoder->empty())
        return splitCommandLine(*options.decoder);
    if (const char* env = std::getenv("IVS_DECODER"); env && *env)
        return splitCommandLine(env);

    // bundled decoder installed next to the running executable
    std::error_code ec;
    const fs::path self = fs::read_symlink("/proc/self/exe", ec);
    if (!ec)
    {
        const fs::path sibling = self.parent_path() / "ivs-decode";
        if (fs::exists(sibling))
            return {sibling.string()};
    }
    return {"ivs-decode"};
}

std::optional<Rational> parseDecoderFps(const std::string& stdoutText)
{
    std::istringstream lines(stdoutText);
    std::string line;
    std::optional<Rational> fps;
    while (std::getline(lines, line))
    {
        if (line.empty() || line.front() != '{')
            continue;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("fps"))
            continue;
        if (j["fps"].is_string())
            fps = Rational::parse(j["fps"].get<std::string>());
        else if (j["fps"].is_number())
            fps = Rational::fromDouble(j["fps"].get<double>());
    }
    return fps;
}

}  // namespace

std::string toString(SourceKind kind)
{
    return kind == SourceKind::Video ? "video" : "image-folder";
}

SourceKind sourceKindFromString(const std::string& s)
{
    if (s == "video")
        return SourceKind::Video;
    if (s == "image-folder")
        return SourceKind::ImageFolder;
    throw Error(ErrorCode::Parse, "unknown source kind '" + s + "'");
}

Rational Rational::parse(const std::string& text)
{
    const auto slash = text.find('/');
    try
    {
        if (slash != std::string::npos)
        {
            std::size_t used = 0;
            const auto num = std::stoll(text.substr(0, slash), &used);
            const auto den = std::stoll(text.substr(slash + 1));
            if (den <= 0)
                throw Error(ErrorCode::Parse, "rational denominator must be positive: " + text);
            return {num, den};
        }
        return fromDouble(std::stod(text));
    }
    catch (const std::logic_error&)
    {
        throw Error(ErrorCode::Parse, "invalid rational '" + text + "'");
    }
}

Rational Rational::fromDouble(double value)
{
    if (!std::isfinite(value))
        throw Error(ErrorCode::Parse, "non-finite rate");
    const double rounded = std::round(value);
    if (std::abs(value - rounded) < 1e-6)
        return {static_cast<std::int64_t>(rounded), 1};
    const double ntsc = value * 1001.0 / 1000.0;
    if (std::abs(ntsc - std::round(ntsc)) < 1e-3)
        return {static_cast<std::int64_t>(std::round(ntsc)) * 1000, 1001};
    return {static_cast<std::int64_t>(std::round(value * 1000.0)), 1000};
}

std::string Rational::toString() const
{
    return std::to_string(num) + "/" + std::to_string(den);
}

std::vector<fs::path> listImageFiles(const fs::path& dir)
{
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
    {
        // label maps for the file mask adapter may live next to the frames
        const std::string name = entry.path().filename().string();
        const bool labels = name.size() > 11 && name.compare(name.size() - 11, 11, ".labels.png") == 0;
        if (entry.is_regular_file() && hasImageExtension(entry.path()) && !labels)
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

fs::path makeTempDirectory(const std::string& prefix)
{
    std::random_device rd;
    std::mt19937_64 rng(rd() ^ static_cast<std::uint64_t>(::getpid()));
    for (int attempt = 0; attempt < 100; ++attempt)
    {
        const fs::path candidate = fs::temp_directory_path() / (prefix + std::to_string(rng() % 100000000000ULL));
        std::error_code ec;
        if (fs::create_directory(candidate, ec))
            return candidate;
    }
    throw Error(ErrorCode::Io, "could not create a temporary directory");
}

std::shared_ptr<FrameSource> FrameSource::open(const fs::path& path, const OpenOptions& options)
{
    std::error_code ec;
    if (!fs::exists(path, ec))
        throw Error(ErrorCode::NotFound, "unreadable path: " + path.string());

    std::shared_ptr<FrameSource> src(new FrameSource());
    src->_cacheCapacity = std::max<std::size_t>(1, options.cacheCapacity);
    src->_info.origin = path;

    if (fs::is_directory(path))
    {
        src->_info.kind = SourceKind::ImageFolder;
        src->_files = listImageFiles(path);
    }
    else
    {
        src->_info.kind = SourceKind::Video;
        fs::path outDir = options.scratchDir;
        if (outDir.empty())
        {
            outDir = makeTempDirectory("ivs-decode-");
            src->_ownedScratch = outDir;
        }
        else
        {
            fs::create_directories(outDir);
        }

        auto argv = resolveDecoder(options);
        argv.push_back(path.string());
        argv.push_back(outDir.string());
        argv.push_back(kFramePattern);
        const ProcessResult res = runProcess(argv);
        if (res.exitCode != 0)
            throw Error(ErrorCode::DecoderProcess, "decoder '" + argv.front() + "' failed with exit code " +
                                                       std::to_string(res.exitCode) + ": " + res.err);
        src->_info.nativeFps = parseDecoderFps(res.out);
        src->_files = listImageFiles(outDir);
    }

    if (src->_files.empty())
        throw Error(ErrorCode::Decode, "no decodable frames in " + path.string());

    if (options.fps)
        src->_info.nativeFps = options.fps;
    src->_info.frameCount = static_cast<FrameIndex>(src->_files.size());
    src->_info.resolution = src->decode(0).size();
    return src;
}

std::shared_ptr<FrameSource> FrameSource::fromImages(std::vector<Image> frames, std::optional<Rational> fps, fs::path origin)
{
    if (frames.empty())
        throw Error(ErrorCode::Decode, "no decodable frames");
    std::shared_ptr<FrameSource> src(new FrameSource());
    src->_info.kind = SourceKind::ImageFolder;
    src->_info.origin = std::move(origin);
    src->_info.nativeFps = fps;
    src->_info.frameCount = static_cast<FrameIndex>(frames.size());
    src->_info.resolution = frames.front().size();
    for (auto& f : frames)
    {
        if (f.size() != src->_info.resolution)
            throw Error(ErrorCode::InvalidArgument, "all frames of a source must share one resolution");
        if (f.channels() == 1)
        {
            Image rgb(f.width(), f.height(), 3);
            for (std::size_t i = 0; i < f.samples().size(); ++i)
                rgb.samples()[3 * i] = rgb.samples()[3 * i + 1] = rgb.samples()[3 * i + 2] = f.samples()[i];
            f = std::move(rgb);
        }
    }
    src->_memory = std::move(frames);
    return src;
}

FrameSource::~FrameSource()
{
    if (!_ownedScratch.empty())
    {
        std::error_code ec;
        fs::remove_all(_ownedScratch, ec);
    }
}

void FrameSource::checkIndex(FrameIndex index) const
{
    if (index < 0 || index >= _info.frameCount)
        throw Error(ErrorCode::OutOfRange,
                    "frame index " + std::to_string(index) + " out of range [0, " + std::to_string(_info.frameCount) + ")");
}

Image FrameSource::decode(FrameIndex index) const
{
    if (!_memory.empty())
        return _memory[static_cast<std::size_t>(index)];
    return readImage(_files[static_cast<std::size_t>(index)], ColorMode::Rgb);
}

Image FrameSource::readFrame(FrameIndex index) const
{
    checkIndex(index);
    if (!_memory.empty())
        return _memory[static_cast<std::size_t>(index)];

    {
        std::lock_guard lock(_cacheMutex);
        if (auto it = _cache.find(index); it != _cache.end())
        {
            _lru.splice(_lru.begin(), _lru, it->second.second);
            return *it->second.first;
        }
    }

    auto img = std::make_shared<const Image>(decode(index));
    if (img->size() != _info.resolution)
        throw Error(ErrorCode::Decode, "frame " + std::to_string(index) + " has resolution " +
                                           std::to_string(img->width()) + "x" + std::to_string(img->height()) +
                                           ", expected " + std::to_string(_info.resolution.width) + "x" +
                                           std::to_string(_info.resolution.height));

    std::lock_guard lock(_cacheMutex);
    if (_cache.find(index) == _cache.end())
    {
        _lru.push_front(index);
        _cache.emplace(index, std::make_pair(img, _lru.begin()));
        while (_cache.size() > _cacheCapacity)
        {
            _cache.erase(_lru.back());
            _lru.pop_back();
        }
    }
    return *img;
}

fs::path FrameSource::framePath(FrameIndex index) const
{
    checkIndex(index);
    if (_files.empty())
        return {};
    return _files[static_cast<std::size_t>(index)];
}

}  // namespace ivs::media

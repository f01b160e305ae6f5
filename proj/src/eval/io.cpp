#include <ivs/eval/io.hpp>

#include <ivs/error.hpp>
#include <ivs/media/codec.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ivs::eval {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "float depth I/O assumes a little-endian host");

namespace {

std::uint32_t readU32(const std::uint8_t* p)
{
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

void appendU32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + 4);
}

}  // namespace

DepthMap readDepthPng16(const fs::path& path)
{
    const auto img = media::readPng16(path);
    DepthMap map(img.width, img.height);
    for (std::size_t i = 0; i < img.samples.size(); ++i)
    {
        map.valid[i] = img.samples[i] != 0;
        map.depth[i] = img.samples[i] / 1000.0;
    }
    return map;
}

void writeDepthPng16(const DepthMap& map, const fs::path& path)
{
    map.validate();
    media::Image16 img{map.width, map.height, std::vector<std::uint16_t>(map.pixelCount(), 0)};
    for (std::size_t i = 0; i < map.pixelCount(); ++i)
    {
        if (!map.valid[i])
            continue;
        const double mm = std::round(map.depth[i] * 1000.0);
        if (mm < 1.0 || mm > 65535.0)
            throw Error(ErrorCode::OutOfRange, "depth " + std::to_string(map.depth[i]) + " m does not fit 16-bit millimeters");
        img.samples[i] = static_cast<std::uint16_t>(mm);
    }
    media::writePng16(path, img);
}

DepthMap readDepthFloat(const fs::path& path)
{
    const auto bytes = media::readFileBytes(path);
    if (bytes.size() < 12)
        throw Error(ErrorCode::Parse, path.string() + ": truncated depth header");
    const std::uint32_t w = readU32(bytes.data());
    const std::uint32_t h = readU32(bytes.data() + 4);
    if (readU32(bytes.data() + 8) != kDepthMagic)
        throw Error(ErrorCode::Parse, path.string() + ": bad depth magic");
    const std::uint64_t n = static_cast<std::uint64_t>(w) * h;
    if (w > (1u << 16) || h > (1u << 16) || bytes.size() != 12 + 4 * n)
        throw Error(ErrorCode::Parse, path.string() + ": depth payload size does not match " + std::to_string(w) + "x" +
                                          std::to_string(h));
    DepthMap map(static_cast<int>(w), static_cast<int>(h));
    for (std::uint64_t i = 0; i < n; ++i)
    {
        float f;
        std::memcpy(&f, bytes.data() + 12 + 4 * i, 4);
        map.valid[i] = std::isfinite(f) && f > 0.0f;
        map.depth[i] = map.valid[i] ? f : 0.0;
    }
    return map;
}

void writeDepthFloat(const DepthMap& map, const fs::path& path)
{
    map.validate();
    std::vector<std::uint8_t> out;
    out.reserve(12 + 4 * map.pixelCount());
    appendU32(out, static_cast<std::uint32_t>(map.width));
    appendU32(out, static_cast<std::uint32_t>(map.height));
    appendU32(out, kDepthMagic);
    for (std::size_t i = 0; i < map.pixelCount(); ++i)
    {
        const float f = map.valid[i] ? static_cast<float>(map.depth[i]) : 0.0f;
        const auto* p = reinterpret_cast<const std::uint8_t*>(&f);
        out.insert(out.end(), p, p + 4);
    }
    media::writeFileBytes(path, out);
}

DepthMap readDepth(const fs::path& path)
{
    return path.extension() == ".png" ? readDepthPng16(path) : readDepthFloat(path);
}

void writeDepth(const DepthMap& map, const fs::path& path)
{
    if (path.extension() == ".png")
        writeDepthPng16(map, path);
    else
        writeDepthFloat(map, path);
}

Trajectory parseTum(std::string_view text)
{
    Trajectory t;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line))
    {
        ++lineNo;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::istringstream ls(line);
        double v[8];
        int count = 0;
        while (count < 8 && ls >> v[count])
            ++count;
        std::string rest;
        if ((count != 8 && count != 4) || (ls >> rest))
            throw Error(ErrorCode::Parse, "TUM line " + std::to_string(lineNo) + ": expected 't x y z [qx qy qz qw]'");
        TrajectoryPose p;
        p.stamp = v[0];
        p.position = {v[1], v[2], v[3]};
        if (count == 8)
        {
            // Eigen's constructor order is (w, x, y, z).
            Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
            const double norm = q.norm();
            if (!(norm > 0.0))
                throw Error(ErrorCode::Parse, "TUM line " + std::to_string(lineNo) + ": zero quaternion");
            // Files store ~7 significant digits, so renormalize to reach unit length.
            q.coeffs() /= norm;
            p.orientation = q;
        }
        t.poses.push_back(p);
    }
    t.validate();
    return t;
}

std::string formatTum(const Trajectory& t)
{
    std::ostringstream out;
    out << std::setprecision(17);
    for (const auto& p : t.poses)
    {
        const Eigen::Quaterniond q = p.orientation.value_or(Eigen::Quaterniond::Identity());
        out << p.stamp << ' ' << p.position.x() << ' ' << p.position.y() << ' ' << p.position.z() << ' ' << q.x() << ' '
            << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
    }
    return out.str();
}

Trajectory readTum(const fs::path& path)
{
    const auto bytes = media::readFileBytes(path);
    return parseTum({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

void writeTum(const Trajectory& t, const fs::path& path)
{
    const std::string text = formatTum(t);
    media::writeFileBytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace ivs::eval

#include <ivs/media/codec.hpp>

#include <ivs/error.hpp>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>

namespace ivs::media {

namespace {

Image fromMat(const cv::Mat& mat)
{
    cv::Mat m = mat;
    if (m.depth() != CV_8U)
        throw Error(ErrorCode::Decode, "expected an 8-bit image");
    if (m.channels() == 4)
        cv::cvtColor(m, m, cv::COLOR_BGRA2RGB);
    else if (m.channels() == 3)
        cv::cvtColor(m, m, cv::COLOR_BGR2RGB);
    else if (m.channels() != 1)
        throw Error(ErrorCode::Decode, "unsupported channel count");
    if (!m.isContinuous())
        m = m.clone();
    std::vector<std::uint8_t> samples(m.data, m.data + m.total() * m.channels());
    return Image(m.cols, m.rows, m.channels(), std::move(samples));
}

cv::Mat toMat(const Image& img)
{
    cv::Mat view(img.height(), img.width(), img.channels() == 1 ? CV_8UC1 : CV_8UC3,
                 const_cast<std::uint8_t*>(img.samples().data()));
    cv::Mat out;
    if (img.channels() == 3)
        cv::cvtColor(view, out, cv::COLOR_RGB2BGR);
    else
        out = view.clone();
    return out;
}

int imreadFlags(ColorMode mode)
{
    switch (mode)
    {
        case ColorMode::Rgb: return cv::IMREAD_COLOR;
        case ColorMode::Gray: return cv::IMREAD_GRAYSCALE;
        case ColorMode::Unchanged: return cv::IMREAD_ANYCOLOR;
    }
    return cv::IMREAD_COLOR;
}

}  // namespace

Image decodeImage(std::span<const std::uint8_t> bytes, ColorMode mode)
{
    if (bytes.empty())
        throw Error(ErrorCode::Decode, "empty image buffer");
    const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    const cv::Mat mat = cv::imdecode(buf, imreadFlags(mode));
    if (mat.empty())
        throw Error(ErrorCode::Decode, "could not decode image buffer");
    return fromMat(mat);
}

Image readImage(const std::filesystem::path& path, ColorMode mode)
{
    const auto bytes = readFileBytes(path);
    try
    {
        return decodeImage(bytes, mode);
    }
    catch (const Error& e)
    {
        throw Error(ErrorCode::Decode, "failed to decode " + path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encodePng(const Image& img)
{
    std::vector<std::uint8_t> out;
    // fixed compression level so identical pixels give identical bytes
    if (!cv::imencode(".png", toMat(img), out, {cv::IMWRITE_PNG_COMPRESSION, 3}))
        throw Error(ErrorCode::Io, "PNG encoding failed");
    return out;
}

std::vector<std::uint8_t> encodeJpeg(const Image& img, int quality)
{
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".jpg", toMat(img), out, {cv::IMWRITE_JPEG_QUALITY, quality}))
        throw Error(ErrorCode::Io, "JPEG encoding failed");
    return out;
}

void writePng(const std::filesystem::path& path, const Image& img)
{
    writeFileBytes(path, encodePng(img));
}

Image16 readPng16(const std::filesystem::path& path)
{
    const auto bytes = readFileBytes(path);
    const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat mat = cv::imdecode(buf, cv::IMREAD_ANYDEPTH | cv::IMREAD_GRAYSCALE);
    if (mat.empty())
        throw Error(ErrorCode::Decode, "failed to decode " + path.string());
    if (mat.depth() != CV_16U)
        mat.convertTo(mat, CV_16U);
    Image16 out{mat.cols, mat.rows, {}};
    out.samples.resize(mat.total());
    for (int y = 0; y < mat.rows; ++y)
        std::copy_n(mat.ptr<std::uint16_t>(y), mat.cols, out.samples.begin() + static_cast<std::ptrdiff_t>(y) * mat.cols);
    return out;
}

void writePng16(const std::filesystem::path& path, const Image16& img)
{
    cv::Mat mat(img.height, img.width, CV_16UC1, const_cast<std::uint16_t*>(img.samples.data()));
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", mat, out))
        throw Error(ErrorCode::Io, "PNG encoding failed");
    writeFileBytes(path, out);
}

bool hasImageExtension(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::uint8_t> readFileBytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void writeFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace ivs::media

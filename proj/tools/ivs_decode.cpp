// Frame dumper used by FrameSource for video input.
//
//   ivs-decode <input> <outdir> <pattern>
//
// Writes every frame as <outdir>/<pattern % index> (zero-based) and prints {"fps": "num/den"}.

#include <opencv2/imgcodecs.hpp>
#include <opencv2/videoio.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv)
{
    if (argc != 4)
    {
        std::cerr << "usage: ivs-decode <input> <outdir> <pattern>\n";
        return 2;
    }
    const std::string input = argv[1];
    const std::filesystem::path outDir = argv[2];
    const std::string pattern = argv[3];

    cv::VideoCapture cap(input);
    if (!cap.isOpened())
    {
        std::cerr << "ivs-decode: cannot open " << input << "\n";
        return 1;
    }
    std::filesystem::create_directories(outDir);

    const std::vector<int> pngParams = {cv::IMWRITE_PNG_COMPRESSION, 1};
    cv::Mat frame;
    long long index = 0;
    std::vector<char> name(pattern.size() + 32);
    while (cap.read(frame))
    {
        std::snprintf(name.data(), name.size(), pattern.c_str(), index);
        if (!cv::imwrite((outDir / name.data()).string(), frame, pngParams))
        {
            std::cerr << "ivs-decode: cannot write frame " << index << "\n";
            return 1;
        }
        ++index;
    }
    if (index == 0)
    {
        std::cerr << "ivs-decode: no frames decoded from " << input << "\n";
        return 1;
    }

    const double fps = cap.get(cv::CAP_PROP_FPS);
    if (fps > 0.0)
    {
        // NTSC rates come back as 29.97..., report them as exact rationals
        const double ntsc = fps * 1001.0 / 1000.0;
        if (std::abs(ntsc - std::round(ntsc)) < 1e-3 && std::abs(fps - std::round(fps)) > 1e-3)
            std::cout << "{\"fps\": \"" << static_cast<long long>(std::round(ntsc)) * 1000 << "/1001\"}\n";
        else if (std::abs(fps - std::round(fps)) < 1e-6)
            std::cout << "{\"fps\": \"" << static_cast<long long>(std::round(fps)) << "/1\"}\n";
        else
            std::cout << "{\"fps\": " << fps << "}\n";
    }
    return 0;
}

#include <ivs/sampler/focus.hpp>

#include <ivs/error.hpp>

namespace ivs::sampler {

namespace {

void requireKernelSize(const media::GrayImageF& img)
{
    if (img.width() < 3 || img.height() < 3)
        throw Error(ErrorCode::InvalidArgument, "focus measures need an image of at least 3x3 pixels");
}

}  // namespace

std::string toString(FocusOperator op)
{
    return op == FocusOperator::Tenengrad ? "tenengrad" : "laplacian_variance";
}

FocusOperator focusOperatorFromString(const std::string& name)
{
    if (name == "tenengrad")
        return FocusOperator::Tenengrad;
    if (name == "laplacian_variance")
        return FocusOperator::LaplacianVariance;
    throw Error(ErrorCode::InvalidArgument, "unknown focus operator '" + name + "'");
}

double tenengrad(const media::GrayImageF& img, double gradientThreshold)
{
    requireKernelSize(img);
    double sum = 0.0;
    for (int y = 0; y < img.height(); ++y)
    {
        for (int x = 0; x < img.width(); ++x)
        {
            const double tl = img.atClamped(x - 1, y - 1), tc = img.atClamped(x, y - 1), tr = img.atClamped(x + 1, y - 1);
            const double ml = img.atClamped(x - 1, y), mr = img.atClamped(x + 1, y);
            const double bl = img.atClamped(x - 1, y + 1), bc = img.atClamped(x, y + 1), br = img.atClamped(x + 1, y + 1);
            const double gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
            const double gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
            const double mag = gx * gx + gy * gy;
            if (mag >= gradientThreshold)
                sum += mag;
        }
    }
    return sum / static_cast<double>(img.pixelCount());
}

double laplacianVariance(const media::GrayImageF& img)
{
    requireKernelSize(img);
    std::vector<double> response(img.pixelCount());
    double mean = 0.0;
    for (int y = 0; y < img.height(); ++y)
    {
        for (int x = 0; x < img.width(); ++x)
        {
            const double r = img.atClamped(x, y - 1) + img.atClamped(x - 1, y) + img.atClamped(x + 1, y) +
                             img.atClamped(x, y + 1) - 4.0 * img.at(x, y);
            response[static_cast<std::size_t>(y) * img.width() + x] = r;
            mean += r;
        }
    }
    mean /= static_cast<double>(response.size());
    double var = 0.0;
    for (double r : response)
        var += (r - mean) * (r - mean);
    return var / static_cast<double>(response.size());
}

double focusMeasure(const media::GrayImageF& img, FocusOperator op, double gradientThreshold)
{
    return op == FocusOperator::Tenengrad ? tenengrad(img, gradientThreshold) : laplacianVariance(img);
}

}  // namespace ivs::sampler

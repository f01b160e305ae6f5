#pragma once

#include <ivs/media/image.hpp>

#include <string>

namespace ivs::sampler {

enum class FocusOperator
{
    Tenengrad,
    LaplacianVariance,
};

std::string toString(FocusOperator op);
FocusOperator focusOperatorFromString(const std::string& name);

/**
 * Mean of Gx^2 + Gy^2 over all pixels, with 3x3 Sobel kernels and replicated borders.
 * Pixels whose squared gradient magnitude is below `gradientThreshold` contribute 0.
 */
double tenengrad(const media::GrayImageF& img, double gradientThreshold = 0.0);

/// Population variance of the 4-neighbour Laplacian response, replicated borders.
double laplacianVariance(const media::GrayImageF& img);

double focusMeasure(const media::GrayImageF& img, FocusOperator op, double gradientThreshold = 0.0);

}  // namespace ivs::sampler

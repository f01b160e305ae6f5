#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <optional>
#include <vector>

namespace ivs::eval {

/**
 * @brief Per-pixel depth in meters with a validity flag ("an estimate exists").
 */
struct DepthMap
{
    int width = 0;
    int height = 0;
    std::vector<double> depth;
    std::vector<bool> valid;

    DepthMap() = default;
    DepthMap(int w, int h);

    std::size_t pixelCount() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    double& at(int x, int y) { return depth[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }

    /// Throws when a valid pixel has depth <= 0 or a buffer size is off.
    void validate() const;
};

/**
 * @brief Fraction of pixels valid in both maps whose ratio max(d/g, g/d) is strictly below theta.
 */
double deltaAccuracy(const DepthMap& est, const DepthMap& gt, double theta);

struct TrajectoryPose
{
    double stamp = 0.0;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    std::optional<Eigen::Quaterniond> orientation;
};

struct Trajectory
{
    std::vector<TrajectoryPose> poses;

    std::size_t size() const { return poses.size(); }
    bool empty() const { return poses.empty(); }

    static Trajectory fromPositions(const std::vector<Eigen::Vector3d>& positions);

    /// Strictly increasing stamps, unit quaternions within 1e-9.
    void validate() const;
};

struct SimilarityTransform
{
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    double scale = 1.0;

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return scale * (rotation * p) + translation; }
};

/**
 * @brief Least-squares similarity mapping est onto gt (Umeyama), scale fixed to 1 unless withScale.
 *
 * Needs at least 3 non-collinear correspondences of equal count.
 */
SimilarityTransform umeyamaAlign(const Trajectory& est, const Trajectory& gt, bool withScale);

/// Positional RMSE, matched by index; aligned first when align is set.
double poseRmse(const Trajectory& est, const Trajectory& gt, bool align, bool withScale = false);

struct TrajectoryStats
{
    double sigma = 0.0;
    double q10 = 0.0;
    double q90 = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
};

/// Linear interpolation between order statistics at position (n - 1) q.
double quantile(std::vector<double> values, double q);

double populationStdDev(const std::vector<double>& values);

/// Statistics of the distances between consecutive positions.
TrajectoryStats trajectoryStats(const Trajectory& t);

std::vector<double> consecutiveDistances(const Trajectory& t);

}  // namespace ivs::eval

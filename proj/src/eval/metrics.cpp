#include <ivs/eval/metrics.hpp>

#include <ivs/error.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ivs::eval {

DepthMap::DepthMap(int w, int h)
  : width(w),
    height(h),
    depth(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0),
    valid(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), false)
{
    if (w < 0 || h < 0)
        throw Error(ErrorCode::InvalidArgument, "negative depth map size");
}

void DepthMap::validate() const
{
    if (depth.size() != pixelCount() || valid.size() != pixelCount())
        throw Error(ErrorCode::InvalidArgument, "depth map buffers do not match its size");
    for (std::size_t i = 0; i < depth.size(); ++i)
    {
        if (valid[i] && !(depth[i] > 0.0))
            throw Error(ErrorCode::InvalidArgument, "valid depth pixel " + std::to_string(i) + " is not positive");
    }
}

double deltaAccuracy(const DepthMap& est, const DepthMap& gt, double theta)
{
    if (!(theta > 1.0))
        throw Error(ErrorCode::InvalidArgument, "theta must be > 1");
    if (est.width != gt.width || est.height != gt.height)
        throw Error(ErrorCode::InvalidArgument, "depth map dimensions differ");
    est.validate();
    gt.validate();

    std::size_t m = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < est.pixelCount(); ++i)
    {
        if (!est.valid[i] || !gt.valid[i])
            continue;
        ++m;
        const double d = est.depth[i];
        const double g = gt.depth[i];
        if (std::max(d / g, g / d) < theta)
            ++correct;
    }
    if (m == 0)
        throw Error(ErrorCode::Degenerate, "no pixel is valid in both depth maps");
    return static_cast<double>(correct) / static_cast<double>(m);
}

Trajectory Trajectory::fromPositions(const std::vector<Eigen::Vector3d>& positions)
{
    Trajectory t;
    t.poses.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i)
        t.poses.push_back({static_cast<double>(i), positions[i], std::nullopt});
    return t;
}

void Trajectory::validate() const
{
    for (std::size_t i = 0; i < poses.size(); ++i)
    {
        if (i > 0 && !(poses[i].stamp > poses[i - 1].stamp))
            throw Error(ErrorCode::InvalidArgument, "trajectory stamps must increase strictly (pose " + std::to_string(i) + ")");
        if (poses[i].orientation && std::abs(poses[i].orientation->norm() - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidArgument, "quaternion of pose " + std::to_string(i) + " is not unit length");
    }
}

namespace {

Eigen::Matrix3Xd positionMatrix(const Trajectory& t)
{
    Eigen::Matrix3Xd m(3, static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i)
        m.col(static_cast<Eigen::Index>(i)) = t.poses[i].position;
    return m;
}

bool isCollinear(const Eigen::Matrix3Xd& pts)
{
    const Eigen::Vector3d mean = pts.rowwise().mean();
    const Eigen::Matrix3Xd centered = pts.colwise() - mean;
    const Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
    const auto& s = svd.singularValues();
    return s(0) == 0.0 || s(1) <= 1e-10 * s(0);
}

void checkPair(const Trajectory& est, const Trajectory& gt)
{
    if (est.empty() || gt.empty())
        throw Error(ErrorCode::InvalidArgument, "empty trajectory");
    if (est.size() != gt.size())
        throw Error(ErrorCode::InvalidArgument, "trajectory lengths differ (" + std::to_string(est.size()) + " vs " +
                                                    std::to_string(gt.size()) + ")");
}

}  // namespace

SimilarityTransform umeyamaAlign(const Trajectory& est, const Trajectory& gt, bool withScale)
{
    checkPair(est, gt);
    if (est.size() < 3)
        throw Error(ErrorCode::Degenerate, "alignment needs at least 3 correspondences");
    const Eigen::Matrix3Xd src = positionMatrix(est);
    const Eigen::Matrix3Xd dst = positionMatrix(gt);
    if (isCollinear(src) || isCollinear(dst))
        throw Error(ErrorCode::Degenerate, "collinear correspondences");

    const Eigen::Matrix4d m = Eigen::umeyama(src, dst, withScale);
    SimilarityTransform T;
    T.scale = withScale ? m.block<3, 1>(0, 0).norm() : 1.0;
    T.rotation = m.block<3, 3>(0, 0) / T.scale;
    T.translation = m.block<3, 1>(0, 3);
    return T;
}

double poseRmse(const Trajectory& est, const Trajectory& gt, bool align, bool withScale)
{
    checkPair(est, gt);
    SimilarityTransform T;
    if (align)
        T = umeyamaAlign(est, gt, withScale);
    double sum = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i)
        sum += (gt.poses[i].position - T.apply(est.poses[i].position)).squaredNorm();
    return std::sqrt(sum / static_cast<double>(est.size()));
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw Error(ErrorCode::InvalidArgument, "quantile of an empty set");
    if (!(q >= 0.0 && q <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "quantile outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = static_cast<double>(values.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double populationStdDev(const std::vector<double>& values)
{
    if (values.empty())
        throw Error(ErrorCode::InvalidArgument, "standard deviation of an empty set");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double acc = 0.0;
    for (double v : values)
        acc += (v - mean) * (v - mean);
    return std::sqrt(acc / n);
}

std::vector<double> consecutiveDistances(const Trajectory& t)
{
    std::vector<double> d;
    for (std::size_t i = 1; i < t.size(); ++i)
        d.push_back((t.poses[i].position - t.poses[i - 1].position).norm());
    return d;
}

TrajectoryStats trajectoryStats(const Trajectory& t)
{
    if (t.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "trajectory statistics need at least 2 positions");
    const auto d = consecutiveDistances(t);
    TrajectoryStats s;
    s.count = d.size();
    s.mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    s.sigma = populationStdDev(d);
    s.q10 = quantile(d, 0.1);
    s.q90 = quantile(d, 0.9);
    return s;
}

}  // namespace ivs::eval

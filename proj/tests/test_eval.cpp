#include "support.hpp"

#include <ivs/error.hpp>
#include <ivs/eval/io.hpp>
#include <ivs/eval/metrics.hpp>

#include <doctest.h>

#include <functional>

using namespace ivs;
using namespace ivs::eval;

namespace {

DepthMap constantMap(int w, int h, double v)
{
    DepthMap m(w, h);
    std::fill(m.depth.begin(), m.depth.end(), v);
    std::fill(m.valid.begin(), m.valid.end(), true);
    return m;
}

ErrorCode codeOf(const std::function<void()>& f)
{
    try
    {
        f();
    }
    catch (const Error& e)
    {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

Trajectory transformed(const Trajectory& t, const SimilarityTransform& s)
{
    Trajectory out = t;
    for (auto& p : out.poses)
        p.position = s.apply(p.position);
    return out;
}

}  // namespace

TEST_CASE("delta accuracy examples")
{
    const auto a = constantMap(4, 3, 2.0);
    CHECK(deltaAccuracy(a, a, 1.25) == 1.0);

    DepthMap d = constantMap(1, 1, 1.3), g = constantMap(1, 1, 1.0);
    CHECK(deltaAccuracy(d, g, 1.25) == 0.0);
    // strict comparison at the boundary
    d.depth[0] = 1.25;
    CHECK(deltaAccuracy(d, g, 1.25) == 0.0);

    auto half = constantMap(4, 2, 1.0);
    for (int x = 0; x < 4; ++x)
        half.at(x, 1) = 2.0;
    CHECK(deltaAccuracy(half, constantMap(4, 2, 1.0), 1.25) == 0.5);

    // invalid pixels in either map are ignored
    auto masked = half;
    for (int x = 0; x < 4; ++x)
        masked.valid[4 + x] = false;
    CHECK(deltaAccuracy(masked, constantMap(4, 2, 1.0), 1.25) == 1.0);
}

TEST_CASE("delta accuracy errors")
{
    const auto a = constantMap(2, 2, 1.0);
    CHECK((codeOf([&] { deltaAccuracy(a, a, 1.0); }) == ErrorCode::InvalidArgument));
    CHECK((codeOf([&] { deltaAccuracy(a, a, 0.05); }) == ErrorCode::InvalidArgument));
    CHECK((codeOf([&] { deltaAccuracy(a, constantMap(2, 3, 1.0), 1.25); }) == ErrorCode::InvalidArgument));
    auto none = a;
    std::fill(none.valid.begin(), none.valid.end(), false);
    CHECK((codeOf([&] { deltaAccuracy(none, a, 1.25); }) == ErrorCode::Degenerate));
    auto bad = a;
    bad.depth[1] = -1.0;
    CHECK_THROWS_AS(deltaAccuracy(bad, a, 1.25), Error);
}

TEST_CASE("delta accuracy properties")
{
    test::Rng rng(5);
    const std::vector<double> thetas{1.01, 1.05, 1.1, 1.25, 1.5625, 2.0, 4.0};
    for (int t = 0; t < 50; ++t)
    {
        auto [d, g] = test::randomDepthPair(rng, rng.integer(1, 24), rng.integer(1, 24), 0.9);
        d.valid[0] = g.valid[0] = true;
        if (d.depth[0] <= 0)
            d.depth[0] = 1.0;
        double prev = 0.0;
        for (double th : thetas)
        {
            const double v = deltaAccuracy(d, g, th);
            REQUIRE(v == test::deltaOracle(d, g, th));
            REQUIRE(v == deltaAccuracy(g, d, th));
            REQUIRE(v >= prev);
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
            prev = v;
        }
    }
}

TEST_CASE("umeyama alignment")
{
    const auto est = Trajectory::fromPositions({{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {0, 0, 3}, {1, 1, 1}});
    const auto id = umeyamaAlign(est, est, true);
    CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9);
    CHECK(id.translation.norm() < 1e-9);
    CHECK(std::abs(id.scale - 1.0) < 1e-9);

    test::Rng rng(8);
    for (int t = 0; t < 30; ++t)
    {
        SimilarityTransform truth;
        truth.rotation = test::randomRotation(rng);
        truth.translation = {rng.real(-10, 10), rng.real(-10, 10), rng.real(-10, 10)};
        truth.scale = rng.real(0.5, 2.0);
        const auto src = test::randomTrajectory(rng, rng.integer(3, 40));
        const auto dst = transformed(src, truth);
        const auto got = umeyamaAlign(src, dst, true);
        REQUIRE((got.rotation - truth.rotation).cwiseAbs().maxCoeff() < 1e-6);
        REQUIRE((got.translation - truth.translation).cwiseAbs().maxCoeff() < 1e-6);
        REQUIRE(std::abs(got.scale - truth.scale) < 1e-6);

        // rigid variant keeps scale at one
        truth.scale = 1.0;
        const auto rigid = umeyamaAlign(src, transformed(src, truth), false);
        REQUIRE(rigid.scale == 1.0);
        REQUIRE((rigid.rotation - truth.rotation).cwiseAbs().maxCoeff() < 1e-6);
        REQUIRE(std::abs(rigid.rotation.determinant() - 1.0) < 1e-9);
    }
}

TEST_CASE("umeyama degenerate inputs")
{
    const auto two = Trajectory::fromPositions({{0, 0, 0}, {1, 0, 0}});
    CHECK((codeOf([&] { umeyamaAlign(two, two, true); }) == ErrorCode::Degenerate));
    const auto line = Trajectory::fromPositions({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {5, 5, 5}});
    CHECK((codeOf([&] { umeyamaAlign(line, line, false); }) == ErrorCode::Degenerate));
    const auto three = Trajectory::fromPositions({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
    const auto four = Trajectory::fromPositions({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    CHECK_THROWS_AS(umeyamaAlign(three, four, false), Error);
}

TEST_CASE("pose rmse")
{
    test::Rng rng(13);
    const auto a = test::randomTrajectory(rng, 10);
    CHECK(poseRmse(a, a, false) == 0.0);
    SimilarityTransform shift;
    shift.translation = {1, 0, 0};
    const auto b = transformed(a, shift);
    CHECK(std::abs(poseRmse(b, a, false) - 1.0) < 1e-12);
    CHECK(poseRmse(b, a, true) < 1e-9);

    CHECK_THROWS_AS(poseRmse(Trajectory{}, Trajectory{}, false), Error);
    CHECK_THROWS_AS(poseRmse(a, test::randomTrajectory(rng, 9), false), Error);

    for (int t = 0; t < 50; ++t)
    {
        const int n = rng.integer(3, 30);
        const auto est = test::randomTrajectory(rng, n);
        const auto gt = test::randomTrajectory(rng, n);
        const double plain = poseRmse(est, gt, false);
        REQUIRE(poseRmse(est, gt, true) <= plain + 1e-12);
        REQUIRE(poseRmse(est, gt, true, true) <= poseRmse(est, gt, true) + 1e-12);
    }
}

TEST_CASE("trajectory statistics")
{
    std::vector<Eigen::Vector3d> even;
    for (int i = 0; i < 6; ++i)
        even.emplace_back(i, 0, 0);
    const auto s = trajectoryStats(Trajectory::fromPositions(even));
    CHECK(s.sigma == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.q10 == doctest::Approx(1.0));
    CHECK(s.q90 == doctest::Approx(1.0));
    CHECK(s.count == 5);

    const auto gaps = Trajectory::fromPositions({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {12, 0, 0}});
    const std::vector<double> spacing{1, 1, 1, 9};
    const auto g = trajectoryStats(gaps);
    CHECK(g.sigma == doctest::Approx(test::stdDevOracle(spacing)).epsilon(1e-12));
    CHECK(g.sigma == doctest::Approx(std::sqrt(12.0)).epsilon(1e-12));
    CHECK(g.q10 == doctest::Approx(test::quantileOracle(spacing, 0.1)).epsilon(1e-12));
    CHECK(g.q90 == doctest::Approx(test::quantileOracle(spacing, 0.9)).epsilon(1e-12));
    CHECK(g.q90 == doctest::Approx(6.6).epsilon(1e-12));
    CHECK(g.mean == doctest::Approx(3.0));

    CHECK((codeOf([] { trajectoryStats(Trajectory::fromPositions({{0, 0, 0}})); }) == ErrorCode::InvalidArgument));
    CHECK(quantile({5.0}, 0.3) == 5.0);
    CHECK_THROWS_AS(quantile({}, 0.5), Error);
}

TEST_CASE("trajectory statistics are rigid invariant")
{
    test::Rng rng(17);
    for (int t = 0; t < 50; ++t)
    {
        const auto traj = test::randomTrajectory(rng, rng.integer(2, 30));
        SimilarityTransform rigid;
        rigid.rotation = test::randomRotation(rng);
        rigid.translation = {rng.real(-50, 50), rng.real(-50, 50), rng.real(-50, 50)};
        const auto a = trajectoryStats(traj);
        const auto b = trajectoryStats(transformed(traj, rigid));
        REQUIRE(std::abs(a.sigma - b.sigma) < 1e-9);
        REQUIRE(std::abs(a.q10 - b.q10) < 1e-9);
        REQUIRE(std::abs(a.q90 - b.q90) < 1e-9);

        const auto d = consecutiveDistances(traj);
        REQUIRE(std::abs(a.sigma - test::stdDevOracle(d)) < 1e-12);
        const double q = rng.real(0, 1);
        REQUIRE(std::abs(quantile(d, q) - test::quantileOracle(d, q)) < 1e-12);
    }
}

TEST_CASE("depth file round trips")
{
    test::TempDir dir;
    test::Rng rng(21);
    auto [m, unused] = test::randomDepthPair(rng, 13, 7, 0.7);
    (void)unused;
    for (std::size_t i = 0; i < m.pixelCount(); ++i)
        if (!m.valid[i])
            m.depth[i] = 0.0;

    writeDepth(m, dir / "d.bin");
    const auto f = readDepth(dir / "d.bin");
    REQUIRE(f.width == 13);
    REQUIRE(f.height == 7);
    for (std::size_t i = 0; i < m.pixelCount(); ++i)
    {
        REQUIRE(f.valid[i] == m.valid[i]);
        if (m.valid[i])
            REQUIRE(f.depth[i] == static_cast<double>(static_cast<float>(m.depth[i])));
    }

    writeDepth(m, dir / "d.png");
    const auto p = readDepth(dir / "d.png");
    for (std::size_t i = 0; i < m.pixelCount(); ++i)
    {
        REQUIRE(p.valid[i] == m.valid[i]);
        if (m.valid[i])
            REQUIRE(std::abs(p.depth[i] - m.depth[i]) <= 0.0005 + 1e-12);
    }

    // header check
    auto bytes = media::readFileBytes(dir / "d.bin");
    bytes[8] ^= 0xff;
    media::writeFileBytes(dir / "broken.bin", bytes);
    CHECK_THROWS_AS(readDepth(dir / "broken.bin"), Error);
    bytes = media::readFileBytes(dir / "d.bin");
    bytes.resize(bytes.size() - 2);
    media::writeFileBytes(dir / "short.bin", bytes);
    CHECK_THROWS_AS(readDepth(dir / "short.bin"), Error);
}

TEST_CASE("TUM trajectories")
{
    const auto t = parseTum("# timestamp tx ty tz qx qy qz qw\n"
                            "1.0 0 0 0 0 0 0 1\n"
                            "\n"
                            "2.5 1 2 3 0 0 0.7071067811865476 0.7071067811865476\n"
                            "3.0 4 5 6\n");
    REQUIRE(t.size() == 3);
    CHECK(t.poses[1].stamp == 2.5);
    CHECK(t.poses[1].position == Eigen::Vector3d(1, 2, 3));
    REQUIRE(t.poses[1].orientation.has_value());
    CHECK(t.poses[1].orientation->w() == doctest::Approx(std::sqrt(0.5)));
    CHECK_FALSE(t.poses[2].orientation.has_value());

    CHECK_THROWS_AS(parseTum("1 0 0\n"), Error);
    CHECK_THROWS_AS(parseTum("2 0 0 0\n1 0 0 0\n"), Error);
    CHECK_THROWS_AS(parseTum("1 0 0 0 0 0 0 0\n"), Error);

    test::Rng rng(3);
    for (int k = 0; k < 20; ++k)
    {
        auto traj = test::randomTrajectory(rng, rng.integer(1, 20));
        double stamp = rng.real(0, 1e4);
        for (std::size_t i = 0; i < traj.size(); ++i)
        {
            stamp += rng.real(0.001, 1.0);
            traj.poses[i].stamp = stamp;
            if (rng.coin())
                traj.poses[i].orientation = Eigen::Quaterniond(test::randomRotation(rng));
        }
        const auto back = parseTum(formatTum(traj));
        REQUIRE(back.size() == traj.size());
        for (std::size_t i = 0; i < traj.size(); ++i)
        {
            REQUIRE(back.poses[i].stamp == traj.poses[i].stamp);
            REQUIRE(back.poses[i].position == traj.poses[i].position);
            // missing orientations are written as identity so every line keeps 8 columns
            REQUIRE(back.poses[i].orientation.has_value());
            const auto expect = traj.poses[i].orientation.value_or(Eigen::Quaterniond::Identity());
            REQUIRE(back.poses[i].orientation->angularDistance(expect) < 1e-7);
        }
    }
}

// Acceptance suite: one PASS/FAIL line per primary criterion, nonzero exit when any fails.

#include "generators.hpp"
#include "support.hpp"

#include <ivs/core/plugin.hpp>
#include <ivs/core/project.hpp>
#include <ivs/eval/metrics.hpp>
#include <ivs/exporter/exporter.hpp>
#include <ivs/mask/semantic.hpp>
#include <ivs/media/process.hpp>
#include <ivs/plugins.hpp>
#include <ivs/sampler/blur.hpp>
#include <ivs/sampler/flow.hpp>
#include <ivs/sampler/focus.hpp>
#include <ivs/sampler/movement.hpp>
#include <ivs/workflow/workflow.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

using namespace ivs;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome
{
    bool pass = true;
    std::string detail;
};

/// Collects the first few violations of a criterion.
class Checker
{
public:
    void require(bool ok, const std::string& what)
    {
        if (ok)
            return;
        ++_failures;
        if (_failures <= 3)
            _notes.push_back(what);
    }

    void note(const std::string& s) { _info.push_back(s); }

    Outcome outcome() const
    {
        Outcome o;
        o.pass = _failures == 0;
        std::ostringstream os;
        const auto& parts = o.pass ? _info : _notes;
        for (std::size_t i = 0; i < parts.size(); ++i)
            os << (i ? "; " : "") << parts[i];
        if (!o.pass && _failures > 3)
            os << "; " << _failures - 3 << " more";
        o.detail = os.str();
        return o;
    }

private:
    int _failures = 0;
    std::vector<std::string> _notes;
    std::vector<std::string> _info;
};

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double seconds(Clock::time_point since)
{
    return std::chrono::duration<double>(Clock::now() - since).count();
}

Outcome flowOracle()
{
    Checker c;
    test::Rng rng(101);
    const auto start = Clock::now();
    double worst = 0.0, worstIdentical = 0.0;
    for (int k = 0; k < 20; ++k)
    {
        const int dx = rng.integer(-4, 4), dy = rng.integer(-4, 4);
        const auto [ref, cur] = test::shiftedPair(rng, 128, dx, dy);
        const auto f = sampler::denseFlow(ref, cur);
        const double eu = std::abs(test::interiorMean(f.u, 128, 128, 8) - dx);
        const double ev = std::abs(test::interiorMean(f.v, 128, 128, 8) - dy);
        worst = std::max({worst, eu, ev});
        c.require(eu < 0.5 && ev < 0.5, "pair " + std::to_string(k) + " shift (" + std::to_string(dx) + "," +
                                            std::to_string(dy) + ") error " + fmt(eu) + "," + fmt(ev));

        const double same = sampler::movementScore(sampler::denseFlow(ref, ref), 0.0);
        worstIdentical = std::max(worstIdentical, same);
        c.require(same < 0.01, "identical pair " + std::to_string(k) + " score " + fmt(same));
    }
    const double elapsed = seconds(start);
    c.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s");
    c.note("max axis error " + fmt(worst) + " px");
    c.note("max identical score " + fmt(worstIdentical));
    c.note(fmt(elapsed) + " s");
    return c.outcome();
}

Outcome trimmedMeanOracle()
{
    Checker c;
    test::Rng rng(102);
    for (int k = 0; k < 1000; ++k)
    {
        const int n = rng.integer(1, 300);
        const bool repeats = rng.coin();
        const double trim = rng.coin(0.2) ? 0.0 : rng.real(0.0, 0.499);
        sampler::FlowField f{n, 1, {}, {}};
        std::vector<double> mags;
        for (int i = 0; i < n; ++i)
        {
            // multisets with many repeated values half of the time
            const double m = repeats ? rng.integer(0, 6) * 0.75 : rng.real(0.0, 20.0);
            if (rng.coin())
            {
                const double a = rng.real(0.0, 6.283185307179586);
                f.u.push_back(m * std::cos(a));
                f.v.push_back(m * std::sin(a));
            }
            else
            {
                f.u.push_back(rng.coin() ? m : -m);
                f.v.push_back(0.0);
            }
            mags.push_back(std::hypot(f.u.back(), f.v.back()));
        }
        std::sort(mags.begin(), mags.end());
        const auto drop = static_cast<std::size_t>(std::floor(trim * n));
        const std::vector<double> kept(mags.begin() + static_cast<std::ptrdiff_t>(drop),
                                       mags.end() - static_cast<std::ptrdiff_t>(drop));
        const double expect = std::accumulate(kept.begin(), kept.end(), 0.0) / static_cast<double>(kept.size());
        const double got = sampler::movementScore(f, trim);
        c.require(got == expect, "multiset " + std::to_string(k) + ": " + fmt(got) + " vs " + fmt(expect));
    }
    c.note("1000 multisets exact");
    return c.outcome();
}

Outcome redundancy()
{
    Checker c;
    const auto frames = test::stationarySequence(103);
    const auto positions = test::stationaryPositions();
    const auto src = media::FrameSource::fromImages(frames);
    const core::FrameIndex n = static_cast<core::FrameIndex>(frames.size());
    const auto all = core::KeyframeSet::all({0, n});
    const auto out = core::runSampler({"camera-movement", core::Params::object()}, *src, all, builtinPlugins());

    std::size_t inStill = 0, moving = 0, movingKept = 0;
    for (core::FrameIndex i = 0; i < n; ++i)
    {
        const bool still = i >= 10 && i <= 39;
        if (still)
            inStill += out.contains(i);
        else
        {
            ++moving;
            movingKept += out.contains(i);
        }
    }
    c.require(inStill <= 2, std::to_string(inStill) + " frames kept inside 10-39");
    c.require(movingKept * 10 >= moving * 9,
              std::to_string(movingKept) + "/" + std::to_string(moving) + " moving frames kept");

    const auto trajectory = [&](const std::vector<core::FrameIndex>& idx) {
        std::vector<Eigen::Vector3d> p;
        for (auto i : idx)
            p.emplace_back(positions[static_cast<std::size_t>(i)], 0.0, 0.0);
        return eval::Trajectory::fromPositions(p);
    };
    const std::size_t k = out.size();
    c.require(k >= 2, "fewer than two keyframes");
    if (k < 2)
        return c.outcome();
    std::vector<core::FrameIndex> baseline;
    for (std::size_t i = 0; i < k; ++i)
        baseline.push_back(static_cast<core::FrameIndex>(
            std::llround(static_cast<double>(i) * static_cast<double>(n - 1) / static_cast<double>(k - 1))));
    const double sigma = eval::trajectoryStats(trajectory(out.indices())).sigma;
    const double sigmaBase = eval::trajectoryStats(trajectory(baseline)).sigma;
    c.require(sigma < sigmaBase, "sigma " + fmt(sigma) + " not below fixed-step " + fmt(sigmaBase));
    c.note(std::to_string(inStill) + " kept in stationary segment");
    c.note(std::to_string(movingKept) + "/" + std::to_string(moving) + " moving kept");
    c.note("sigma " + fmt(sigma) + " vs fixed-step " + fmt(sigmaBase));
    return c.outcome();
}

Outcome focusOracles()
{
    Checker c;
    test::Rng rng(104);
    for (int k = 0; k < 50; ++k)
    {
        const auto img = test::noiseImage(16, 16, rng);
        const double t = sampler::tenengrad(img), to = test::tenengradOracle(img);
        const double l = sampler::laplacianVariance(img), lo = test::laplacianOracle(img);
        c.require(test::relClose(t, to, 1e-9), "tenengrad image " + std::to_string(k) + ": " + fmt(t) + " vs " + fmt(to));
        c.require(test::relClose(l, lo, 1e-9), "laplacian image " + std::to_string(k) + ": " + fmt(l) + " vs " + fmt(lo));
    }
    for (int k = 0; k < 10; ++k)
    {
        const media::GrayImageF flat(rng.integer(3, 40), rng.integer(3, 40), rng.real(0, 255));
        c.require(sampler::tenengrad(flat) == 0.0, "tenengrad of a constant image");
        c.require(sampler::laplacianVariance(flat) == 0.0, "laplacian of a constant image");
    }
    const auto tex = test::textureImage(64, 64, rng, 0.7);
    double lastT = sampler::tenengrad(tex), lastL = sampler::laplacianVariance(tex);
    for (double sigma : {0.6, 1.0, 1.5, 2.2, 3.0})
    {
        const auto b = test::gaussianBlur(tex, sigma);
        const double t = sampler::tenengrad(b), l = sampler::laplacianVariance(b);
        c.require(t < lastT, "tenengrad not decreasing at sigma " + fmt(sigma));
        c.require(l < lastL, "laplacian not decreasing at sigma " + fmt(sigma));
        lastT = t;
        lastL = l;
    }
    c.note("50 images within 1e-9");
    c.note("5 blur levels strictly decreasing");
    return c.outcome();
}

Outcome blurPipeline()
{
    Checker c;
    test::Rng rng(105);
    const auto tex = test::textureImage(64 + 2 * 40 + 8, 72, rng, 1.0);
    std::vector<media::Image> frames;
    for (int i = 0; i < 40; ++i)
    {
        auto view = test::cropF(tex, 2 * i, 4, 64, 64);
        if (i >= 15 && i <= 20)
            view = test::gaussianBlur(view, 3.0);
        frames.push_back(test::toRgb(view));
    }
    const auto src = media::FrameSource::fromImages(frames);
    const core::Boundaries bounds{0, 40};
    const auto all = core::KeyframeSet::all(bounds);

    const auto sharp = core::runSampler({"blur", core::Params::object()}, *src, all, builtinPlugins());
    for (core::FrameIndex i = 15; i <= 20; ++i)
        c.require(!sharp.contains(i), "sample_sharp kept blurred frame " + std::to_string(i));

    const sampler::BlurParams defaults;
    const sampler::SharpnessScorer score(*src, defaults);
    const int half = defaults.replaceWindow / 2;
    int moved = 0;
    for (core::FrameIndex k = 15; k <= 20; ++k)
    {
        core::FrameIndex best = k;
        bool sharpNeighbour = false;
        for (core::FrameIndex j = std::max<core::FrameIndex>(0, k - half); j <= std::min<core::FrameIndex>(39, k + half); ++j)
        {
            if (score(j) > score(best) || (score(j) == score(best) && j < best))
                best = j;
            sharpNeighbour = sharpNeighbour || j < 15 || j > 20;
        }
        const auto out = core::runSampler({"blur", {{"replace", true}}}, *src, core::KeyframeSet::fromIndices({k}, bounds),
                                          builtinPlugins());
        c.require(out.size() == 1, "replacement of " + std::to_string(k) + " changed the keyframe count");
        if (out.size() != 1)
            continue;
        const auto got = out.indices().front();
        if (score(best) > score(k))
        {
            c.require(got != k && score(got) > score(k), "keyframe " + std::to_string(k) + " stayed despite a sharper neighbour");
            ++moved;
        }
        c.require(got == best, "keyframe " + std::to_string(k) + " moved to " + std::to_string(got) + ", sharpest is " +
                                   std::to_string(best));
        if (sharpNeighbour)
            c.require(got < 15 || got > 20, "keyframe " + std::to_string(k) + " stayed inside the blurred run");
    }
    c.note("sample_sharp kept " + std::to_string(sharp.size()) + "/40, none of 15-20");
    c.note(std::to_string(moved) + "/6 blurred keyframes moved");
    return c.outcome();
}

Outcome deltaMetric()
{
    Checker c;
    test::Rng rng(106);
    const std::vector<double> thetas{1.05, 1.1, 1.25, 1.25 * 1.25};
    for (int k = 0; k < 20; ++k)
    {
        auto [d, g] = test::randomDepthPair(rng, rng.integer(8, 64), rng.integer(8, 64), rng.real(0.3, 0.95));
        d.valid[0] = g.valid[0] = true;
        d.depth[0] = 1.0;
        double prev = -1.0;
        for (double th : thetas)
        {
            const double v = eval::deltaAccuracy(d, g, th);
            const double o = test::deltaOracle(d, g, th);
            c.require(v == o, "pair " + std::to_string(k) + " theta " + fmt(th) + ": " + fmt(v) + " vs " + fmt(o));
            c.require(v >= prev, "pair " + std::to_string(k) + " not monotone at theta " + fmt(th));
            prev = v;
        }
    }
    c.note("20 pairs exact, monotone over 4 thresholds");
    return c.outcome();
}

Outcome alignment()
{
    Checker c;
    test::Rng rng(107);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k)
    {
        eval::SimilarityTransform truth;
        truth.rotation = test::randomRotation(rng);
        truth.translation = {rng.real(-20, 20), rng.real(-20, 20), rng.real(-20, 20)};
        truth.scale = rng.real(0.5, 2.0);
        const auto est = test::randomTrajectory(rng, rng.integer(3, 60));
        auto gt = est;
        for (auto& p : gt.poses)
            p.position = truth.apply(p.position);

        const auto got = eval::umeyamaAlign(est, gt, true);
        const double err = std::max({(got.rotation - truth.rotation).cwiseAbs().maxCoeff(),
                                     (got.translation - truth.translation).cwiseAbs().maxCoeff(),
                                     std::abs(got.scale - truth.scale)});
        worst = std::max(worst, err);
        c.require(err < 1e-6, "transform " + std::to_string(k) + " recovered to " + fmt(err));

        auto noisy = gt;
        for (auto& p : noisy.poses)
            p.position += Eigen::Vector3d(rng.real(-0.5, 0.5), rng.real(-0.5, 0.5), rng.real(-0.5, 0.5));
        for (const auto* target : {&gt, &noisy})
        {
            const double plain = eval::poseRmse(est, *target, false);
            c.require(eval::poseRmse(est, *target, true) <= plain, "rigid-aligned rmse above unaligned on case " + std::to_string(k));
            c.require(eval::poseRmse(est, *target, true, true) <= plain,
                      "similarity-aligned rmse above unaligned on case " + std::to_string(k));
        }
    }
    c.note("max parameter error " + fmt(worst));
    return c.outcome();
}

Outcome maskLogic()
{
    Checker c;
    test::Rng rng(108);
    for (int k = 0; k < 100; ++k)
    {
        const auto lm = test::randomLabels(rng, rng.integer(1, 48), rng.integer(1, 48));
        const auto a = test::randomSelection(rng);
        auto bigger = a;
        for (int id = 0; id < 19; ++id)
            if (rng.coin(0.2))
                bigger.excluded.insert(id);
        const auto b = test::randomSelection(rng);

        const auto ma = mask::labelmapToMask(lm, a);
        c.require(ma == test::maskOracle(lm, a), "selection " + std::to_string(k) + " differs from the oracle");
        const auto mBig = mask::labelmapToMask(lm, bigger);
        bool monotone = true;
        for (std::size_t i = 0; i < ma.values.size(); ++i)
            monotone = monotone && !(ma.values[i] == 0 && mBig.values[i] == 255);
        c.require(monotone, "selection " + std::to_string(k) + " not monotone");
        c.require(mask::labelmapToMask(lm, a.unite(b)) == mask::pixelwiseMin(ma, mask::labelmapToMask(lm, b)),
                  "selection " + std::to_string(k) + " union differs from pixelwise min");
    }
    c.note("100 selections");
    return c.outcome();
}

std::map<std::string, std::string> snapshot(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
    {
        if (e.is_regular_file())
            files[fs::relative(e.path(), root).generic_string()] = test::readText(e.path());
    }
    return files;
}

/// report.json minus its wall-clock timings.
std::string untimedReport(const std::string& text)
{
    auto j = nlohmann::json::parse(text);
    for (auto& s : j["steps"])
        s.erase("duration_ms");
    return j.dump();
}

Outcome endToEnd()
{
    Checker c;
    test::TempDir dir;
    auto frames = test::stationarySequence(109, 90, 20, 50, 96, 4);
    for (int i : {63, 64, 65})
    {
        // a short smeared run for the blur step to avoid
        media::GrayImageF g(96, 96);
        for (int y = 0; y < 96; ++y)
            for (int x = 0; x < 96; ++x)
                g.at(x, y) = frames[static_cast<std::size_t>(i)].at(x, y, 0);
        frames[static_cast<std::size_t>(i)] = test::toRgb(test::gaussianBlur(g, 3.0));
    }
    test::writeFolder(dir / "input", frames);
    test::writeText(dir / "workflow.json", R"({
  "name": "headless",
  "steps": [
    {"kind": "sampler", "plugin": "camera-movement", "params": {}},
    {"kind": "sampler", "plugin": "nth-frame", "params": {"target_fps": 1}},
    {"kind": "sampler", "plugin": "blur", "params": {"replace": true}},
    {"kind": "transform", "plugin": "semantic-mask", "params": {"adapter": "stub", "stub_label": 0}},
    {"kind": "export", "params": {"out": "export", "masks": true, "colmap": true}}
  ]
})");
    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    const fs::path out = dir / "out";
    const std::vector<std::string> argv{IVS_CLI, "run", "--input", (dir / "input").string(), "--workflow",
                                        (dir / "workflow.json").string(), "--out", out.string(), "--fps", "30"};

    const auto start = Clock::now();
    const auto first = media::runProcess(argv);
    const double elapsed = seconds(start);
    c.require(first.exitCode == 0, "ivs run exited " + std::to_string(first.exitCode) + ": " + first.err);
    c.require(elapsed < 60.0, "run took " + fmt(elapsed) + " s");
    if (first.exitCode != 0)
        return c.outcome();

    const auto report = nlohmann::json::parse(test::readText(out / "report.json"));
    const auto keyframes = report["keyframes"].get<std::vector<core::FrameIndex>>();
    c.require(report["ok"] == true, "report is not ok");
    c.require(!keyframes.empty(), "no keyframes");

    const fs::path root = out / "export";
    const auto manifest =
        exporter::ExportManifest::fromJson(nlohmann::json::parse(test::readText(root / exporter::ExportManifest::kFileName)), root);
    c.require(manifest.frames.size() == keyframes.size(), "manifest lists " + std::to_string(manifest.frames.size()) +
                                                               " frames for " + std::to_string(keyframes.size()) + " keyframes");
    for (std::size_t i = 0; i < manifest.frames.size(); ++i)
    {
        const auto& e = manifest.frames[i];
        if (i < keyframes.size())
            c.require(e.index == keyframes[i], "manifest entry " + std::to_string(i) + " has the wrong index");
        c.require(fs::exists(root / e.file), "missing " + e.file);
        if (!fs::exists(root / e.file))
            continue;
        c.require(exporter::sha256Hex(media::readFileBytes(root / e.file)) == e.sha256, "hash mismatch for " + e.file);
        const auto image = fs::path(e.file).filename().string();
        c.require(fs::path(e.file).parent_path() == "images", e.file + " is outside images/");
        c.require(e.mask.has_value(), "no mask recorded for " + e.file);
        c.require(fs::exists(root / "masks" / (image + ".png")), "missing masks/" + image + ".png");
        if (e.mask)
        {
            c.require(*e.mask == "masks/" + image + ".png", "mask named " + *e.mask);
            c.require(exporter::sha256Hex(media::readFileBytes(root / *e.mask)) == *e.maskSha256, "mask hash mismatch");
            const auto m = media::readImage(root / *e.mask);
            const auto img = media::readImage(root / e.file);
            c.require(m.size() == img.size(), "mask size differs for " + image);
        }
    }
    const std::string ini = fs::exists(root / "project.ini") ? test::readText(root / "project.ini") : "";
    c.require(ini.find("image_path=" + (root / "images").string()) != std::string::npos, "project.ini image_path");
    c.require(ini.find("mask_path=" + (root / "masks").string()) != std::string::npos, "project.ini mask_path");
    c.require(fs::exists(out / "export/project.ivs.json"), "no project file in the export");

    // rerun into the same location so absolute paths in project.ini agree
    auto before = snapshot(out);
    fs::remove_all(out);
    const auto second = media::runProcess(argv);
    ::unsetenv("SOURCE_DATE_EPOCH");
    c.require(second.exitCode == 0, "rerun exited " + std::to_string(second.exitCode));
    auto after = snapshot(out);
    c.require(untimedReport(before["report.json"]) == untimedReport(after["report.json"]), "report differs between runs");
    before.erase("report.json");
    after.erase("report.json");
    c.require(before == after, "rerun output is not byte-identical");

    c.note(std::to_string(keyframes.size()) + " keyframes " + [&] {
        std::string s = "{";
        for (std::size_t i = 0; i < keyframes.size(); ++i)
            s += (i ? "," : "") + std::to_string(keyframes[i]);
        return s + "}";
    }());
    c.note(std::to_string(before.size()) + " files identical on rerun");
    c.note(fmt(elapsed) + " s");
    return c.outcome();
}

Outcome persistence()
{
    Checker c;
    test::Rng rng(110);
    const auto& reg = builtinPlugins();
    for (int k = 0; k < 100; ++k)
    {
        const auto p = test::randomProject(rng);
        const auto text = core::serializeProject(p);
        c.require(core::parseProject(text) == p, "project " + std::to_string(k) + " changed on parse");
        c.require(core::serializeProject(core::parseProject(text)) == text, "project " + std::to_string(k) + " not canonical");
        // whitespace and layout of the input do not leak into the output
        const auto relaid = nlohmann::json::parse(text).dump(rng.integer(0, 4));
        c.require(core::serializeProject(core::parseProject(relaid)) == text, "project " + std::to_string(k) + " relaid differs");

        const auto w = test::randomWorkflow(rng);
        const auto wtext = workflow::serializeWorkflow(w);
        c.require(workflow::parseWorkflow(wtext, reg) == w, "workflow " + std::to_string(k) + " changed on parse");
        c.require(workflow::serializeWorkflow(workflow::parseWorkflow(wtext, reg)) == wtext,
                  "workflow " + std::to_string(k) + " not canonical");
        const auto wrelaid = nlohmann::json::parse(wtext).dump(rng.integer(0, 4));
        c.require(workflow::serializeWorkflow(workflow::parseWorkflow(wrelaid, reg)) == wtext,
                  "workflow " + std::to_string(k) + " relaid differs");
    }
    c.note("100 projects and 100 workflows");
    return c.outcome();
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"flow-oracle", flowOracle},
        {"trimmed-mean-oracle", trimmedMeanOracle},
        {"redundancy-behavior", redundancy},
        {"focus-measure-oracles", focusOracles},
        {"blur-pipeline", blurPipeline},
        {"delta-accuracy-metric", deltaMetric},
        {"alignment", alignment},
        {"mask-logic", maskLogic},
        {"end-to-end-headless", endToEnd},
        {"persistence", persistence},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria)
    {
        Outcome o;
        try
        {
            o = run();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << o.detail << ")" << std::endl;
    }
    std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}

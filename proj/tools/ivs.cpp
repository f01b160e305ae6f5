// ivs: headless runner, evaluation commands and the HTTP service.

#include <ivs/core/keyframes.hpp>
#include <ivs/error.hpp>
#include <ivs/eval/io.hpp>
#include <ivs/eval/metrics.hpp>
#include <ivs/media/codec.hpp>
#include <ivs/plugins.hpp>
#include <ivs/service/service.hpp>
#include <ivs/workflow/workflow.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ivs::core::Boundaries parseBoundaries(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ivs::Error(ivs::ErrorCode::InvalidArgument, "--boundaries expects start:end");
    try
    {
        return {std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1))};
    }
    catch (const std::logic_error&)
    {
        throw ivs::Error(ivs::ErrorCode::InvalidArgument, "--boundaries expects integers, got '" + text + "'");
    }
}

ivs::media::OpenOptions openOptions(const std::string& decoder, const std::string& fps)
{
    ivs::media::OpenOptions oo;
    if (!decoder.empty())
        oo.decoder = decoder;
    if (!fps.empty())
        oo.fps = ivs::media::Rational::parse(fps);
    return oo;
}

json transformJson(const ivs::eval::SimilarityTransform& t)
{
    json r = json::array();
    for (int i = 0; i < 3; ++i)
        r.push_back({t.rotation(i, 0), t.rotation(i, 1), t.rotation(i, 2)});
    return {{"rotation", r}, {"translation", {t.translation.x(), t.translation.y(), t.translation.z()}}, {"scale", t.scale}};
}

ivs::service::Service* g_service = nullptr;

void onSignal(int)
{
    if (g_service)
        g_service->stop();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Keyframe selection and preprocessing for photogrammetry"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run a workflow headless on one input");
    std::string input, workflowFile, outDir = "ivs_out", boundaries, decoder, fps;
    bool verbose = false;
    run->add_option("--input", input, "Video file or image folder")->required();
    run->add_option("--workflow", workflowFile, "Workflow JSON")->required();
    run->add_option("--out", outDir, "Output directory")->capture_default_str();
    run->add_option("--boundaries", boundaries, "Frame range start:end (end exclusive)");
    run->add_option("--fps", fps, "Frame rate of an image folder, e.g. 30 or 30000/1001");
    run->add_option("--decoder", decoder, "Video decoder command (overrides IVS_DECODER)");
    run->add_flag("--verbose,-v", verbose, "Print progress");

    // eval
    auto* evalCmd = app.add_subcommand("eval", "Evaluation metrics");
    evalCmd->require_subcommand(1);
    auto* depth = evalCmd->add_subcommand("depth", "Depth accuracy of an estimate against ground truth");
    std::string est, gt;
    double theta = 1.25;
    depth->add_option("--est", est)->required();
    depth->add_option("--gt", gt)->required();
    depth->add_option("--theta", theta)->capture_default_str();

    auto* traj = evalCmd->add_subcommand("traj", "Positional RMSE between two TUM trajectories");
    bool align = false, scale = false;
    traj->add_option("--est", est)->required();
    traj->add_option("--gt", gt)->required();
    traj->add_flag("--align", align, "Similarity-align before measuring");
    traj->add_flag("--scale", scale, "Estimate scale during alignment");

    auto* stats = evalCmd->add_subcommand("stats", "Inter-keyframe distance statistics");
    std::string trajFile;
    stats->add_option("--traj", trajFile)->required();

    // serve
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API and the web UI");
    std::string host = "127.0.0.1", staticDir, project;
    int port = 8080;
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--static", staticDir, "Directory with the built UI");
    serve->add_option("--out", outDir, "Export root")->capture_default_str();
    serve->add_option("--project", project, "Media source or project file to open at startup");
    serve->add_option("--fps", fps, "Frame rate of an image folder");
    serve->add_option("--decoder", decoder, "Video decoder command");

    app.add_subcommand("plugins", "List plugin schemas as JSON");

    CLI11_PARSE(app, argc, argv);

    try
    {
        const auto& registry = ivs::builtinPlugins();

        if (run->parsed())
        {
            const auto bytes = ivs::media::readFileBytes(workflowFile);
            const auto spec =
                ivs::workflow::parseWorkflow({reinterpret_cast<const char*>(bytes.data()), bytes.size()}, registry);
            const auto source = ivs::media::FrameSource::open(input, openOptions(decoder, fps));

            ivs::workflow::RunOptions ro;
            ro.outDir = outDir;
            if (!boundaries.empty())
                ro.boundaries = parseBoundaries(boundaries);
            if (verbose)
            {
                ro.progress = [last = -1](double p) mutable {
                    const int pct = static_cast<int>(p * 100.0);
                    if (pct / 10 != last / 10)
                        std::cerr << "progress " << pct << "%\n";
                    last = pct;
                };
            }
            const auto report = ivs::workflow::runWorkflow(*source, spec, [](const std::string& l) { std::cout << l << '\n'; },
                                                           ro, registry);
            return report.ok ? 0 : 1;
        }

        if (depth->parsed())
        {
            const auto e = ivs::eval::readDepth(est);
            const auto g = ivs::eval::readDepth(gt);
            std::cout << json{{"theta", theta}, {"delta", ivs::eval::deltaAccuracy(e, g, theta)}}.dump(2) << '\n';
            return 0;
        }

        if (traj->parsed())
        {
            const auto e = ivs::eval::readTum(est);
            const auto g = ivs::eval::readTum(gt);
            json out = {{"aligned", align}, {"scale", scale}, {"poses", e.size()},
                        {"rmse", ivs::eval::poseRmse(e, g, align, scale)}};
            if (align)
                out["transform"] = transformJson(ivs::eval::umeyamaAlign(e, g, scale));
            std::cout << out.dump(2) << '\n';
            return 0;
        }

        if (stats->parsed())
        {
            const auto s = ivs::eval::trajectoryStats(ivs::eval::readTum(trajFile));
            std::cout << json{{"sigma", s.sigma}, {"q10", s.q10}, {"q90", s.q90}, {"mean", s.mean}, {"count", s.count}}.dump(2)
                      << '\n';
            return 0;
        }

        if (serve->parsed())
        {
            ivs::service::ServiceOptions so;
            so.outDir = outDir;
            so.staticDir = staticDir;
            so.openOptions = openOptions(decoder, "");
            ivs::service::Service service(so, registry);
            if (!project.empty())
                service.openProject(project, fps.empty() ? std::nullopt : std::optional(ivs::media::Rational::parse(fps)));
            const int bound = service.bind(host, port);
            if (bound < 0)
                throw ivs::Error(ivs::ErrorCode::Io, "cannot bind " + host);
            g_service = &service;
            std::signal(SIGINT, onSignal);
            std::signal(SIGTERM, onSignal);
            std::cerr << "listening on http://" << host << ":" << bound << "\n";
            service.serve();
            g_service = nullptr;
            return 0;
        }

        std::cout << registry.describe().dump(2) << '\n';
        return 0;
    }
    catch (const ivs::core::ValidationError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        for (const auto& f : e.fields())
            std::cerr << "  " << f.field << ": " << f.message << '\n';
        return 2;
    }
    catch (const ivs::Error& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return ivs::isValidationError(e.code()) ? 2 : 1;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

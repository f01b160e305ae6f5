#include <ivs/workflow/workflow.hpp>

#include <ivs/core/project.hpp>
#include <ivs/media/codec.hpp>

#include <algorithm>
#include <chrono>
#include <sstream>

namespace fs = std::filesystem;

namespace ivs::workflow {

using core::FieldError;
using core::ParamSpec;
using core::ParamType;

namespace {

std::string stepField(std::size_t index, const std::string& field)
{
    return "steps[" + std::to_string(index) + "]" + (field.empty() ? "" : "." + field);
}

StepKind stepKindFromString(const std::string& s, std::size_t index)
{
    if (s == "sampler")
        return StepKind::Sampler;
    if (s == "transform")
        return StepKind::Transform;
    if (s == "export")
        return StepKind::Export;
    throw core::ValidationError("invalid workflow", {{stepField(index, "kind"), "unknown step kind '" + s + "'"}});
}

void appendPrefixed(std::vector<FieldError>& out, const std::vector<FieldError>& errors, std::size_t index)
{
    for (const auto& e : errors)
        out.push_back({stepField(index, "params." + e.field), e.message});
}

std::string formatSelection(std::size_t a, std::size_t b)
{
    return std::to_string(a) + " -> " + std::to_string(b);
}

}  // namespace

std::string toString(StepKind kind)
{
    switch (kind)
    {
        case StepKind::Sampler: return "sampler";
        case StepKind::Transform: return "transform";
        case StepKind::Export: return "export";
    }
    return "unknown";
}

const core::ParamSchema& exportSchema()
{
    static const core::ParamSchema schema({
        ParamSpec{.name = "out", .type = ParamType::String, .defaultValue = "export", .description = "output directory"},
        ParamSpec{.name = "roi", .type = ParamType::Object, .description = "crop {x, y, w, h}"},
        ParamSpec{.name = "resolution", .type = ParamType::Object, .description = "target {width, height}"},
        ParamSpec{.name = "naming", .type = ParamType::String, .defaultValue = "frame_%06d.png"},
        ParamSpec{.name = "masks", .type = ParamType::Boolean, .defaultValue = false},
        ParamSpec{.name = "colmap", .type = ParamType::Boolean, .defaultValue = false},
        ParamSpec{.name = "reconstruct_command",
                  .type = ParamType::String,
                  .description = "template with {project}, {images}, {masks}"},
    });
    return schema;
}

std::vector<FieldError> validateExportParams(const core::Params& params)
{
    auto errors = exportSchema().validate(params);
    if (!errors.empty())
        return errors;
    const auto positiveInt = [](const nlohmann::json& obj, const char* key, int min) {
        return obj.contains(key) && obj[key].is_number_integer() && obj[key].get<long long>() >= min;
    };
    if (params.contains("roi") && !params["roi"].is_null())
    {
        const auto& r = params["roi"];
        if (!positiveInt(r, "x", 0) || !positiveInt(r, "y", 0) || !positiveInt(r, "w", 1) || !positiveInt(r, "h", 1))
            errors.push_back({"roi", "expected {x>=0, y>=0, w>=1, h>=1}"});
    }
    if (params.contains("resolution") && !params["resolution"].is_null())
    {
        const auto& r = params["resolution"];
        if (!positiveInt(r, "width", 1) || !positiveInt(r, "height", 1))
            errors.push_back({"resolution", "expected {width>=1, height>=1}"});
    }
    if (params.contains("out"))
    {
        const fs::path out = params["out"].get<std::string>();
        if (out.empty() || out.is_absolute())
            errors.push_back({"out", "must be a non-empty relative path"});
    }
    if (params.contains("naming"))
    {
        try
        {
            exporter::formatFrameName(params["naming"].get<std::string>(), 0);
        }
        catch (const Error& e)
        {
            errors.push_back({"naming", e.what()});
        }
    }
    return errors;
}

ExportStepConfig ExportStepConfig::fromParams(const core::Params& params)
{
    ExportStepConfig c;
    c.out = params.value("out", c.out);
    if (params.contains("roi") && !params["roi"].is_null())
    {
        const auto& r = params["roi"];
        c.roi = media::Roi{r["x"].get<int>(), r["y"].get<int>(), r["w"].get<int>(), r["h"].get<int>()};
    }
    if (params.contains("resolution") && !params["resolution"].is_null())
        c.resolution = media::Size{params["resolution"]["width"].get<int>(), params["resolution"]["height"].get<int>()};
    c.naming = params.value("naming", c.naming);
    c.masks = params.value("masks", c.masks);
    c.colmap = params.value("colmap", c.colmap);
    if (params.contains("reconstruct_command"))
        c.reconstructCommand = params["reconstruct_command"].get<std::string>();
    return c;
}

WorkflowSpec workflowFromJson(const nlohmann::json& j, const core::PluginRegistry& registry)
{
    if (!j.is_object())
        throw core::ValidationError("invalid workflow", {{"<root>", "expected object"}});
    WorkflowSpec spec;
    if (j.contains("name"))
    {
        if (!j["name"].is_string())
            throw core::ValidationError("invalid workflow", {{"name", "expected string"}});
        spec.name = j["name"].get<std::string>();
    }
    if (!j.contains("steps") || !j["steps"].is_array())
        throw core::ValidationError("invalid workflow", {{"steps", "expected array"}});
    if (j["steps"].empty())
        throw core::ValidationError("invalid workflow", {{"steps", "at least one step is required"}});

    std::vector<FieldError> errors;
    for (std::size_t i = 0; i < j["steps"].size(); ++i)
    {
        const auto& s = j["steps"][i];
        if (!s.is_object() || !s.contains("kind") || !s["kind"].is_string())
        {
            errors.push_back({stepField(i, "kind"), "missing step kind"});
            continue;
        }
        WorkflowStep step;
        step.kind = stepKindFromString(s["kind"].get<std::string>(), i);
        if (s.contains("params"))
            step.params = s["params"];
        if (!step.params.is_object())
        {
            errors.push_back({stepField(i, "params"), "expected object"});
            continue;
        }
        if (step.kind != StepKind::Export)
        {
            if (!s.contains("plugin") || !s["plugin"].is_string())
            {
                errors.push_back({stepField(i, "plugin"), "missing plugin id"});
                continue;
            }
            step.plugin = s["plugin"].get<std::string>();
        }
        else if (s.contains("plugin"))
        {
            step.plugin = s["plugin"].is_string() ? s["plugin"].get<std::string>() : "";
        }

        switch (step.kind)
        {
            case StepKind::Sampler:
                if (const auto* p = registry.sampler(step.plugin))
                    appendPrefixed(errors, p->validate(step.params), i);
                else
                    errors.push_back({stepField(i, "plugin"), "unknown sampler plugin '" + step.plugin + "'"});
                break;
            case StepKind::Transform:
                if (const auto* p = registry.transform(step.plugin))
                    appendPrefixed(errors, p->validate(step.params), i);
                else
                    errors.push_back({stepField(i, "plugin"), "unknown transform plugin '" + step.plugin + "'"});
                break;
            case StepKind::Export:
                appendPrefixed(errors, validateExportParams(step.params), i);
                break;
        }
        spec.steps.push_back(std::move(step));
    }
    if (!errors.empty())
        throw core::ValidationError("invalid workflow", std::move(errors));
    return spec;
}

WorkflowSpec parseWorkflow(std::string_view text, const core::PluginRegistry& registry)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw Error(ErrorCode::Parse, "workflow parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    return workflowFromJson(j, registry);
}

nlohmann::json toJson(const WorkflowSpec& spec)
{
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : spec.steps)
    {
        nlohmann::json js = {{"kind", toString(s.kind)}, {"params", s.params}};
        if (!s.plugin.empty())
            js["plugin"] = s.plugin;
        steps.push_back(std::move(js));
    }
    return {{"name", spec.name}, {"steps", steps}};
}

std::string serializeWorkflow(const WorkflowSpec& spec)
{
    return core::canonicalDump(toJson(spec));
}

nlohmann::json RunReport::toJson() const
{
    nlohmann::json steps_ = nlohmann::json::array();
    for (const auto& s : steps)
    {
        steps_.push_back({{"index", s.index},
                          {"kind", workflow::toString(s.kind)},
                          {"plugin", s.plugin},
                          {"duration_ms", s.durationMs},
                          {"input_size", s.inputSize},
                          {"output_size", s.outputSize},
                          {"paths", s.paths},
                          {"ok", s.ok},
                          {"error", s.error}});
    }
    return {{"name", name}, {"ok", ok}, {"error", error}, {"steps", steps_}, {"keyframes", keyframes}};
}

RunReport runWorkflow(const media::FrameSource& source, const WorkflowSpec& spec, const ReportSink& sink,
                      const RunOptions& options, const core::PluginRegistry& registry)
{
    const auto emit = [&](const std::string& line) {
        if (sink)
            sink(line);
    };
    const auto progress = [&](double value) {
        if (options.progress)
            options.progress(std::clamp(value, 0.0, 1.0));
    };

    RunReport report;
    report.name = spec.name;

    const core::Boundaries bounds = options.boundaries.value_or(core::Boundaries{0, source.frameCount()});
    bounds.validate(source.frameCount());
    core::KeyframeSet current = core::KeyframeSet::all(bounds);
    exporter::MaskStore masks;
    std::vector<core::SamplerStep> executed;

    const double stepCount = static_cast<double>(spec.steps.size());
    for (std::size_t i = 0; i < spec.steps.size(); ++i)
    {
        const WorkflowStep& step = spec.steps[i];
        StepReport sr;
        sr.index = i;
        sr.kind = step.kind;
        sr.plugin = step.plugin;
        sr.inputSize = current.size();
        const auto start = std::chrono::steady_clock::now();
        const auto stepProgress = [&, i](double f) { progress((static_cast<double>(i) + std::clamp(f, 0.0, 1.0)) / stepCount); };

        try
        {
            switch (step.kind)
            {
                case StepKind::Sampler:
                {
                    const core::SamplerStep ss{step.plugin, step.params};
                    current = core::runSampler(ss, source, current, registry, stepProgress);
                    executed.push_back(ss);
                    break;
                }
                case StepKind::Transform:
                {
                    const auto* plugin = registry.transform(step.plugin);
                    if (!plugin)
                        throw Error(ErrorCode::UnknownPlugin, "unknown plugin '" + step.plugin + "'");
                    const auto params = plugin->schema().withDefaults(step.params);
                    std::size_t done = 0;
                    for (core::FrameIndex index : current.indices())
                    {
                        const auto outputs = plugin->transform(source.readFrame(index),
                                                               {index, source.framePath(index)}, params);
                        if (outputs.empty())
                            throw Error(ErrorCode::PluginContract, "transform '" + step.plugin + "' produced no image");
                        masks[index] = mask::BinaryMask::fromImage(outputs.front());
                        stepProgress(static_cast<double>(++done) / static_cast<double>(current.size()));
                    }
                    executed.push_back({step.plugin, step.params});
                    break;
                }
                case StepKind::Export:
                {
                    if (current.empty())
                        throw Error(ErrorCode::InvalidArgument, "no keyframes to export");
                    const auto cfg = ExportStepConfig::fromParams(step.params);
                    const fs::path dir = options.outDir / cfg.out;
                    exporter::ExportOptions eo;
                    eo.roi = cfg.roi;
                    eo.resolution = cfg.resolution;
                    eo.naming = cfg.naming;
                    eo.masks = cfg.masks ? &masks : nullptr;
                    const auto manifest = exporter::exportImages(current, source, dir, eo);
                    sr.paths.push_back((dir / exporter::ExportManifest::kFileName).string());
                    if (cfg.colmap)
                    {
                        const auto project = exporter::emitColmapProject(manifest, dir, cfg.masks);
                        sr.paths.push_back(project.string());
                        if (cfg.reconstructCommand)
                        {
                            const auto res = exporter::launchReconstruction(*cfg.reconstructCommand, project,
                                                                            dir / "images", dir / "masks");
                            if (res.exitCode != 0)
                                throw Error(ErrorCode::PluginRuntime, "reconstruction command failed (exit " +
                                                                          std::to_string(res.exitCode) + "): " + res.err);
                        }
                    }

                    core::ProjectFile pf;
                    pf.source = {source.info().origin.string(), source.info().kind, source.info().nativeFps};
                    pf.boundaries = bounds;
                    pf.keyframes = current.indices();
                    pf.steps = executed;
                    pf.createdAt = core::currentTimestamp();
                    const fs::path projectPath = dir / "project.ivs.json";
                    core::saveProject(pf, projectPath);
                    sr.paths.push_back(projectPath.string());
                    stepProgress(1.0);
                    break;
                }
            }
            sr.ok = true;
        }
        catch (const Error& e)
        {
            sr.error = e.what();
        }
        catch (const std::exception& e)
        {
            sr.error = e.what();
        }

        sr.durationMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        sr.outputSize = current.size();
        std::ostringstream line;
        line << "step " << i << " [" << toString(step.kind) << (step.plugin.empty() ? "" : " " + step.plugin) << "] ";
        if (sr.ok)
            line << "selection " << formatSelection(sr.inputSize, sr.outputSize) << " in " << static_cast<long long>(sr.durationMs)
                 << " ms";
        else
            line << "FAILED: " << sr.error;
        for (const auto& p : sr.paths)
            line << "\n  wrote " << p;
        emit(line.str());

        const bool failed = !sr.ok;
        report.steps.push_back(std::move(sr));
        if (failed)
        {
            report.error = "step " + std::to_string(i) + " (" + toString(step.kind) +
                           (step.plugin.empty() ? "" : " " + step.plugin) + ") failed: " + report.steps.back().error;
            break;
        }
    }

    report.ok = report.error.empty();
    report.keyframes = current.indices();
    if (options.writeReport)
    {
        fs::create_directories(options.outDir);
        const std::string text = core::canonicalDump(report.toJson());
        media::writeFileBytes(options.outDir / "report.json",
                              {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    }
    emit(report.ok ? "workflow '" + spec.name + "' finished" : "workflow '" + spec.name + "' failed: " + report.error);
    return report;
}

}  // namespace ivs::workflow

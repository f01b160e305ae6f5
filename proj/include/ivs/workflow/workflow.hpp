#pragma once

#include <ivs/core/plugin.hpp>
#include <ivs/exporter/exporter.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ivs::workflow {

enum class StepKind
{
    Sampler,
    Transform,
    Export,
};

std::string toString(StepKind kind);

struct WorkflowStep
{
    StepKind kind = StepKind::Sampler;
    std::string plugin;  ///< empty for export steps
    core::Params params = core::Params::object();

    bool operator==(const WorkflowStep&) const = default;
};

struct WorkflowSpec
{
    std::string name;
    std::vector<WorkflowStep> steps;

    bool operator==(const WorkflowSpec&) const = default;
};

/**
 * Export step params: out (directory relative to the run output), roi {x,y,w,h},
 * resolution {width,height}, naming, masks, colmap, reconstruct_command.
 */
const core::ParamSchema& exportSchema();

struct ExportStepConfig
{
    std::string out = "export";
    std::optional<media::Roi> roi;
    std::optional<media::Size> resolution;
    std::string naming = "frame_%06d.png";
    bool masks = false;
    bool colmap = false;
    std::optional<std::string> reconstructCommand;

    static ExportStepConfig fromParams(const core::Params& params);
};

std::vector<core::FieldError> validateExportParams(const core::Params& params);

/// Validates every step; errors name the step index and field.
WorkflowSpec workflowFromJson(const nlohmann::json& j, const core::PluginRegistry& registry);
WorkflowSpec parseWorkflow(std::string_view text, const core::PluginRegistry& registry);

nlohmann::json toJson(const WorkflowSpec& spec);
std::string serializeWorkflow(const WorkflowSpec& spec);

struct StepReport
{
    std::size_t index = 0;
    StepKind kind = StepKind::Sampler;
    std::string plugin;
    double durationMs = 0.0;
    std::size_t inputSize = 0;
    std::size_t outputSize = 0;
    std::vector<std::string> paths;
    bool ok = false;
    std::string error;
};

struct RunReport
{
    std::string name;
    bool ok = false;
    std::string error;
    std::vector<StepReport> steps;
    std::vector<core::FrameIndex> keyframes;

    nlohmann::json toJson() const;
};

using ReportSink = std::function<void(const std::string& line)>;

struct RunOptions
{
    std::filesystem::path outDir = "ivs_out";
    std::optional<core::Boundaries> boundaries;
    core::ProgressFn progress;
    /// Write report.json into outDir.
    bool writeReport = true;
};

/**
 * @brief Runs the steps in order against one evolving keyframe set (initially all frames in the
 * boundaries). The first failing step aborts the rest; the report then has ok == false and names it.
 */
RunReport runWorkflow(const media::FrameSource& source, const WorkflowSpec& spec, const ReportSink& sink,
                      const RunOptions& options, const core::PluginRegistry& registry);

}  // namespace ivs::workflow

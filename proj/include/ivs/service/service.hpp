#pragma once

#include <ivs/core/plugin.hpp>
#include <ivs/core/project.hpp>
#include <ivs/exporter/exporter.hpp>
#include <ivs/media/frame_source.hpp>

#include <nlohmann/json.hpp>

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace ivs::service {

enum class JobKind
{
    Sample,
    Transform,
    Export,
    Workflow,
};

enum class JobState
{
    Queued,
    Running,
    Done,
    Failed,
};

std::string toString(JobKind kind);
std::string toString(JobState state);
JobKind jobKindFromString(const std::string& s);

struct Job
{
    std::string id;
    JobKind kind = JobKind::Sample;
    std::string plugin;
    nlohmann::json params = nlohmann::json::object();
    JobState state = JobState::Queued;
    double progress = 0.0;
    nlohmann::json result;
    std::string error;

    nlohmann::json toJson() const;
};

struct ServiceOptions
{
    /// Export and workflow output root.
    std::filesystem::path outDir = "ivs_out";
    /// Served at `/` when set and present.
    std::filesystem::path staticDir;
    media::OpenOptions openOptions;
    /// semantic-mask params used by the mask preview (adapter selection).
    nlohmann::json maskParams = {{"adapter", "stub"}};
    std::function<void(const std::string&)> log;
};

/**
 * @brief HTTP facade over one project session.
 *
 * Readers never wait on a running job: jobs work on a snapshot and commit under a short exclusive
 * lock. A single worker thread executes jobs; while one is queued or running every mutating request
 * answers 409.
 */
class Service
{
public:
    Service(ServiceOptions options, const core::PluginRegistry& registry);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds to `host` on `port` (0 picks a free port) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    void serve();
    void stop();

    /// Opens a media source or a saved project file (detected by a `.json` extension).
    nlohmann::json openProject(const std::filesystem::path& path, std::optional<media::Rational> fps = std::nullopt);

    nlohmann::json state() const;
    std::optional<Job> job(const std::string& id) const;

private:
    struct Session
    {
        std::shared_ptr<media::FrameSource> source;
        core::ProjectFile project;
        std::filesystem::path projectPath;
        exporter::MaskStore masks;
        bool manualEdits = false;
    };

    void routes();
    void log(const std::string& line) const;

    /// Throws Conflict while a job is queued or running. Caller holds _jobsMutex.
    void requireIdle() const;
    /// Returns the job as queued, before the worker can pick it up.
    Job submit(Job job);
    Job validateJob(const nlohmann::json& body) const;

    void workerLoop();
    void execute(const std::string& id);
    void setProgress(const std::string& id, double value);

    nlohmann::json stateLocked() const;
    void persistLocked();
    core::KeyframeSet currentKeyframesLocked() const;

    ServiceOptions _options;
    const core::PluginRegistry& _registry;
    std::unique_ptr<httplib::Server> _server;

    mutable std::shared_mutex _stateMutex;
    std::optional<Session> _session;

    mutable std::mutex _jobsMutex;
    std::condition_variable _jobsCv;
    std::map<std::string, Job> _jobs;
    std::deque<std::string> _queue;
    std::optional<std::string> _active;
    std::uint64_t _nextJob = 1;
    bool _stopping = false;
    std::thread _worker;
};

}  // namespace ivs::service

#include <ivs/service/service.hpp>

#include <ivs/error.hpp>
#include <ivs/mask/semantic.hpp>
#include <ivs/media/codec.hpp>
#include <ivs/workflow/workflow.hpp>

#include <httplib.h>

#include <algorithm>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace ivs::service {

using nlohmann::json;

std::string toString(JobKind kind)
{
    switch (kind)
    {
        case JobKind::Sample: return "sample";
        case JobKind::Transform: return "transform";
        case JobKind::Export: return "export";
        case JobKind::Workflow: return "workflow";
    }
    return "unknown";
}

std::string toString(JobState state)
{
    switch (state)
    {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Done: return "done";
        case JobState::Failed: return "failed";
    }
    return "unknown";
}

JobKind jobKindFromString(const std::string& s)
{
    for (JobKind k : {JobKind::Sample, JobKind::Transform, JobKind::Export, JobKind::Workflow})
    {
        if (toString(k) == s)
            return k;
    }
    throw core::ValidationError("invalid job", {{"kind", "expected sample, transform, export or workflow"}});
}

json Job::toJson() const
{
    json j = {{"id", id},
              {"kind", toString(kind)},
              {"state", toString(state)},
              {"progress", progress},
              {"params", params}};
    if (!plugin.empty())
        j["plugin"] = plugin;
    if (!result.is_null())
        j["result"] = result;
    if (!error.empty())
        j["error"] = error;
    return j;
}

namespace {

struct HttpError
{
    int status;
    json body;
};

HttpError httpErrorFrom(const std::exception& e)
{
    if (const auto* v = dynamic_cast<const core::ValidationError*>(&e))
    {
        json fields = json::array();
        for (const auto& f : v->fields())
            fields.push_back({{"field", f.field}, {"message", f.message}});
        return {422, {{"error", v->what()}, {"fields", fields}}};
    }
    if (const auto* ie = dynamic_cast<const Error*>(&e))
    {
        int status = 500;
        if (ie->code() == ErrorCode::NotFound)
            status = 404;
        else if (ie->code() == ErrorCode::Conflict)
            status = 409;
        else if (isValidationError(ie->code()))
            status = 422;
        return {status, {{"error", ie->what()}, {"code", std::string(toString(ie->code()))}}};
    }
    return {500, {{"error", e.what()}}};
}

void sendJson(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

/// Runs a handler, turning toolkit exceptions into JSON error responses.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn)
{
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try
        {
            fn(req, res);
        }
        catch (const json::exception& e)
        {
            sendJson(res, 422, {{"error", std::string("malformed request body: ") + e.what()}});
        }
        catch (const std::exception& e)
        {
            const auto err = httpErrorFrom(e);
            sendJson(res, err.status, err.body);
        }
    };
}

json parseBody(const httplib::Request& req)
{
    if (req.body.empty())
        return json::object();
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw core::ValidationError("invalid request", {{"<body>", "expected a JSON object"}});
    return j;
}

media::FrameIndex parseIndex(const std::string& text)
{
    try
    {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos == text.size())
            return v;
    }
    catch (const std::exception&)
    {
    }
    throw core::ValidationError("invalid request", {{"index", "expected an integer"}});
}

std::vector<mask::ClassId> parseClassList(const std::string& text)
{
    std::vector<mask::ClassId> ids;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        if (item.empty())
            continue;
        try
        {
            std::size_t pos = 0;
            ids.push_back(std::stoi(item, &pos));
            if (pos != item.size())
                throw std::invalid_argument(item);
        }
        catch (const std::exception&)
        {
            throw core::ValidationError("invalid request", {{"classes", "expected comma separated class ids"}});
        }
    }
    return ids;
}

const char* noProject = "no project is open";

}  // namespace

Service::Service(ServiceOptions options, const core::PluginRegistry& registry)
  : _options(std::move(options)),
    _registry(registry),
    _server(std::make_unique<httplib::Server>())
{
    routes();
    _worker = std::thread([this] { workerLoop(); });
}

Service::~Service()
{
    stop();
    {
        std::lock_guard lock(_jobsMutex);
        _stopping = true;
    }
    _jobsCv.notify_all();
    if (_worker.joinable())
        _worker.join();
}

int Service::bind(const std::string& host, int port)
{
    if (port == 0)
        return _server->bind_to_any_port(host);
    if (!_server->bind_to_port(host, port))
        throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void Service::serve()
{
    _server->listen_after_bind();
}

void Service::stop()
{
    if (_server)
        _server->stop();
}

void Service::log(const std::string& line) const
{
    if (_options.log)
        _options.log(line);
    else
        std::clog << "[ivs serve] " << line << '\n';
}

void Service::requireIdle() const
{
    if (_active || !_queue.empty())
        throw Error(ErrorCode::Conflict, "a job is running");
}

json Service::openProject(const fs::path& path, std::optional<media::Rational> fps)
{
    Session session;
    media::OpenOptions oo = _options.openOptions;
    if (fps)
        oo.fps = fps;

    if (path.extension() == ".json" && fs::is_regular_file(path))
    {
        session.project = core::loadProject(path);
        session.projectPath = path;
        if (!oo.fps)
            oo.fps = session.project.source.fps;
        session.source = media::FrameSource::open(session.project.source.path, oo);
        session.project.boundaries.validate(session.source->frameCount());
        core::KeyframeSet::fromIndices(session.project.keyframes, session.project.boundaries);
    }
    else
    {
        session.source = media::FrameSource::open(path, oo);
        const auto& info = session.source->info();
        session.project.source = {fs::absolute(path).string(), info.kind, info.nativeFps};
        session.project.boundaries = {0, info.frameCount};
        session.project.keyframes = core::KeyframeSet::all(session.project.boundaries).indices();
        session.project.createdAt = core::currentTimestamp();
    }

    std::lock_guard jobs(_jobsMutex);
    requireIdle();
    std::unique_lock lock(_stateMutex);
    _session = std::move(session);
    log("opened " + path.string() + " (" + std::to_string(_session->source->frameCount()) + " frames)");
    return stateLocked();
}

json Service::stateLocked() const
{
    if (!_session)
        throw Error(ErrorCode::NotFound, noProject);
    const auto& p = _session->project;
    return {{"frame_count", _session->source->frameCount()},
            {"fps", p.source.fps ? json(p.source.fps->toString()) : json(nullptr)},
            {"source", {{"path", p.source.path}, {"kind", media::toString(p.source.kind)}}},
            {"boundaries", {{"start", p.boundaries.start}, {"end", p.boundaries.end}}},
            {"keyframes", p.keyframes},
            {"steps", core::toJson(p)["steps"]},
            {"masks", _session->masks.size()},
            {"project_path", _session->projectPath.string()}};
}

json Service::state() const
{
    std::optional<std::string> active;
    {
        std::lock_guard jobs(_jobsMutex);
        active = _active;
    }
    std::shared_lock lock(_stateMutex);
    json s = stateLocked();
    s["active_job"] = active ? json(*active) : json(nullptr);
    return s;
}

std::optional<Job> Service::job(const std::string& id) const
{
    std::lock_guard lock(_jobsMutex);
    const auto it = _jobs.find(id);
    if (it == _jobs.end())
        return std::nullopt;
    return it->second;
}

void Service::persistLocked()
{
    if (_session && !_session->projectPath.empty())
        core::saveProject(_session->project, _session->projectPath);
}

core::KeyframeSet Service::currentKeyframesLocked() const
{
    return core::KeyframeSet::fromIndices(_session->project.keyframes, _session->project.boundaries);
}

Job Service::validateJob(const json& body) const
{
    Job job;
    if (!body.contains("kind") || !body["kind"].is_string())
        throw core::ValidationError("invalid job", {{"kind", "required"}});
    job.kind = jobKindFromString(body["kind"].get<std::string>());
    if (body.contains("params"))
        job.params = body["params"];
    if (!job.params.is_object())
        throw core::ValidationError("invalid job", {{"params", "expected object"}});
    if (body.contains("plugin"))
    {
        if (!body["plugin"].is_string())
            throw core::ValidationError("invalid job", {{"plugin", "expected string"}});
        job.plugin = body["plugin"].get<std::string>();
    }

    std::vector<core::FieldError> errors;
    const auto prefixed = [&](const std::vector<core::FieldError>& fs) {
        for (const auto& f : fs)
            errors.push_back({"params." + f.field, f.message});
    };
    switch (job.kind)
    {
        case JobKind::Sample:
            if (const auto* p = _registry.sampler(job.plugin))
                prefixed(p->validate(job.params));
            else
                errors.push_back({"plugin", "unknown sampler plugin '" + job.plugin + "'"});
            break;
        case JobKind::Transform:
            if (const auto* p = _registry.transform(job.plugin))
                prefixed(p->validate(job.params));
            else
                errors.push_back({"plugin", "unknown transform plugin '" + job.plugin + "'"});
            break;
        case JobKind::Export:
            prefixed(workflow::validateExportParams(job.params));
            break;
        case JobKind::Workflow:
            workflow::workflowFromJson(job.params, _registry);
            break;
    }
    if (!errors.empty())
        throw core::ValidationError("invalid job", std::move(errors));
    return job;
}

Job Service::submit(Job job)
{
    std::lock_guard lock(_jobsMutex);
    requireIdle();
    {
        std::shared_lock state(_stateMutex);
        if (!_session)
            throw Error(ErrorCode::NotFound, noProject);
    }
    job.id = "job-" + std::to_string(_nextJob++);
    job.state = JobState::Queued;
    _jobs.emplace(job.id, job);
    _queue.push_back(job.id);
    _jobsCv.notify_all();
    return job;
}

void Service::setProgress(const std::string& id, double value)
{
    std::lock_guard lock(_jobsMutex);
    auto& j = _jobs.at(id);
    j.progress = std::max(j.progress, std::clamp(value, 0.0, 1.0));
}

void Service::workerLoop()
{
    for (;;)
    {
        std::string id;
        {
            std::unique_lock lock(_jobsMutex);
            _jobsCv.wait(lock, [this] { return _stopping || !_queue.empty(); });
            if (_stopping)
                return;
            id = _queue.front();
            _queue.pop_front();
            _active = id;
            _jobs.at(id).state = JobState::Running;
        }
        execute(id);
    }
}

void Service::execute(const std::string& id)
{
    Job job;
    {
        std::lock_guard lock(_jobsMutex);
        job = _jobs.at(id);
    }

    std::shared_ptr<media::FrameSource> source;
    core::KeyframeSet current;
    exporter::MaskStore masks;
    {
        std::shared_lock lock(_stateMutex);
        source = _session->source;
        current = currentKeyframesLocked();
        if (job.kind == JobKind::Export)
            masks = _session->masks;
    }
    const auto progress = [this, &id](double v) { setProgress(id, v); };

    json result;
    std::string error;
    try
    {
        switch (job.kind)
        {
            case JobKind::Sample:
            {
                const core::SamplerStep step{job.plugin, job.params};
                const auto out = core::runSampler(step, *source, current, _registry, progress);
                std::unique_lock lock(_stateMutex);
                if (_session->manualEdits)
                    log("sampler '" + job.plugin + "' replaced a manually edited selection");
                _session->project.keyframes = out.indices();
                _session->project.steps.push_back(step);
                _session->manualEdits = false;
                persistLocked();
                result = {{"input_size", current.size()}, {"output_size", out.size()}, {"keyframes", out.indices()}};
                break;
            }
            case JobKind::Transform:
            {
                const auto* plugin = _registry.transform(job.plugin);
                const auto params = plugin->schema().withDefaults(job.params);
                exporter::MaskStore computed;
                std::size_t done = 0;
                for (core::FrameIndex i : current.indices())
                {
                    const auto images = plugin->transform(source->readFrame(i), {i, source->framePath(i)}, params);
                    if (images.empty())
                        throw Error(ErrorCode::PluginContract, "transform '" + job.plugin + "' produced no image");
                    computed[i] = mask::BinaryMask::fromImage(images.front());
                    progress(static_cast<double>(++done) / static_cast<double>(std::max<std::size_t>(1, current.size())));
                }
                std::unique_lock lock(_stateMutex);
                for (auto& [i, m] : computed)
                    _session->masks[i] = std::move(m);
                result = {{"masks", computed.size()}};
                break;
            }
            case JobKind::Export:
            {
                if (current.empty())
                    throw Error(ErrorCode::InvalidArgument, "no keyframes to export");
                const auto cfg = workflow::ExportStepConfig::fromParams(job.params);
                const fs::path dir = _options.outDir / cfg.out;
                exporter::ExportOptions eo;
                eo.roi = cfg.roi;
                eo.resolution = cfg.resolution;
                eo.naming = cfg.naming;
                eo.masks = cfg.masks ? &masks : nullptr;
                const auto manifest = exporter::exportImages(current, *source, dir, eo);
                progress(0.8);
                result = {{"dir", dir.string()}, {"frames", manifest.frames.size()}};
                if (cfg.colmap)
                    result["project"] = exporter::emitColmapProject(manifest, dir, cfg.masks).string();
                break;
            }
            case JobKind::Workflow:
            {
                const auto spec = workflow::workflowFromJson(job.params, _registry);
                workflow::RunOptions ro;
                ro.outDir = _options.outDir;
                ro.boundaries = current.bounds();
                ro.progress = progress;
                const auto report = workflow::runWorkflow(*source, spec, [this](const std::string& l) { log(l); }, ro,
                                                          _registry);
                result = report.toJson();
                if (!report.ok)
                    throw Error(ErrorCode::PluginRuntime, report.error);
                std::unique_lock lock(_stateMutex);
                _session->project.keyframes = report.keyframes;
                for (const auto& s : spec.steps)
                {
                    if (s.kind == workflow::StepKind::Sampler)
                        _session->project.steps.push_back({s.plugin, s.params});
                }
                _session->manualEdits = false;
                persistLocked();
                break;
            }
        }
    }
    catch (const std::exception& e)
    {
        error = e.what();
    }

    std::lock_guard lock(_jobsMutex);
    _active.reset();
    auto& j = _jobs.at(id);
    if (error.empty())
    {
        j.progress = 1.0;
        j.state = JobState::Done;
    }
    else
    {
        j.state = JobState::Failed;
        j.error = error;
        log(id + " failed: " + error);
    }
    j.result = std::move(result);
}

void Service::routes()
{
    auto& s = *_server;

    s.Get("/api/project", guarded([this](const httplib::Request&, httplib::Response& res) { sendJson(res, 200, state()); }));

    s.Post("/api/project", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const json body = parseBody(req);
        if (!body.contains("path") || !body["path"].is_string())
            throw core::ValidationError("invalid request", {{"path", "required"}});
        std::optional<media::Rational> fps;
        if (body.contains("fps") && !body["fps"].is_null())
            fps = body["fps"].is_string() ? media::Rational::parse(body["fps"].get<std::string>())
                                          : media::Rational::fromDouble(body["fps"].get<double>());
        openProject(body["path"].get<std::string>(), fps);
        sendJson(res, 200, state());
    }));

    s.Get("/api/frames/:i", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto index = parseIndex(req.path_params.at("i"));
        std::shared_ptr<media::FrameSource> source;
        {
            std::shared_lock lock(_stateMutex);
            if (!_session)
                throw Error(ErrorCode::NotFound, noProject);
            source = _session->source;
        }
        if (index < 0 || index >= source->frameCount())
            throw Error(ErrorCode::NotFound, "frame " + std::to_string(index) + " does not exist");
        const media::Image img = source->readFrame(index);
        if (req.has_param("w"))
        {
            const auto w = parseIndex(req.get_param_value("w"));
            if (w < 1)
                throw core::ValidationError("invalid request", {{"w", "must be >= 1"}});
            const int width = static_cast<int>(std::min<media::FrameIndex>(w, img.width()));
            const int height = std::max(1, static_cast<int>(std::lround(static_cast<double>(img.height()) * width / img.width())));
            const auto thumb = media::resizeCrop(img, std::nullopt, media::Size{width, height});
            const auto bytes = media::encodeJpeg(thumb);
            res.set_content(std::string(bytes.begin(), bytes.end()), "image/jpeg");
        }
        else
        {
            const auto bytes = media::encodePng(img);
            res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
        }
    }));

    s.Get("/api/keyframes", guarded([this](const httplib::Request&, httplib::Response& res) {
        std::shared_lock lock(_stateMutex);
        if (!_session)
            throw Error(ErrorCode::NotFound, noProject);
        const auto& p = _session->project;
        sendJson(res, 200,
                 {{"boundaries", {{"start", p.boundaries.start}, {"end", p.boundaries.end}}}, {"keyframes", p.keyframes}});
    }));

    s.Put("/api/keyframes/:i", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto index = parseIndex(req.path_params.at("i"));
        const json body = parseBody(req);
        if (!body.contains("selected") || !body["selected"].is_boolean())
            throw core::ValidationError("invalid request", {{"selected", "expected boolean"}});
        const bool selected = body["selected"].get<bool>();

        std::lock_guard jobs(_jobsMutex);
        requireIdle();
        std::unique_lock lock(_stateMutex);
        if (!_session)
            throw Error(ErrorCode::NotFound, noProject);
        auto& p = _session->project;
        if (!p.boundaries.contains(index))
            throw core::ValidationError("invalid request", {{"index", "outside the boundaries"}});
        auto set = currentKeyframesLocked();
        if (set.contains(index) != selected)
            set = core::toggleKeyframe(set, index);
        p.keyframes = set.indices();
        _session->manualEdits = true;
        persistLocked();
        sendJson(res, 200,
                 {{"boundaries", {{"start", p.boundaries.start}, {"end", p.boundaries.end}}}, {"keyframes", p.keyframes}});
    }));

    s.Put("/api/boundaries", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const json body = parseBody(req);
        if (!body.contains("start") || !body["start"].is_number_integer() || !body.contains("end") ||
            !body["end"].is_number_integer())
            throw core::ValidationError("invalid request", {{"start", "integer required"}, {"end", "integer required"}});
        const core::Boundaries b{body["start"].get<core::FrameIndex>(), body["end"].get<core::FrameIndex>()};

        std::lock_guard jobs(_jobsMutex);
        requireIdle();
        std::unique_lock lock(_stateMutex);
        if (!_session)
            throw Error(ErrorCode::NotFound, noProject);
        b.validate(_session->source->frameCount());
        auto& p = _session->project;
        p.keyframes = core::setBoundaries(currentKeyframesLocked(), b).indices();
        p.boundaries = b;
        persistLocked();
        sendJson(res, 200, {{"boundaries", {{"start", b.start}, {"end", b.end}}}, {"keyframes", p.keyframes}});
    }));

    s.Post("/api/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
        sendJson(res, 202, submit(validateJob(parseBody(req))).toJson());
    }));

    s.Get("/api/jobs/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto j = job(req.path_params.at("id"));
        if (!j)
            throw Error(ErrorCode::NotFound, "unknown job");
        sendJson(res, 200, j->toJson());
    }));

    s.Get("/api/preview/mask/:i", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto index = parseIndex(req.path_params.at("i"));
        const auto* plugin = dynamic_cast<const mask::SemanticMaskPlugin*>(_registry.transform("semantic-mask"));
        if (!plugin)
            throw Error(ErrorCode::NotFound, "semantic-mask plugin is not available");
        json params = _options.maskParams;
        if (req.has_param("classes"))
            params["excluded"] = parseClassList(req.get_param_value("classes"));
        const auto errors = plugin->validate(params);
        if (!errors.empty())
            throw core::ValidationError("invalid mask preview", errors);
        params = plugin->schema().withDefaults(params);

        std::shared_ptr<media::FrameSource> source;
        {
            std::shared_lock lock(_stateMutex);
            if (!_session)
                throw Error(ErrorCode::NotFound, noProject);
            source = _session->source;
        }
        if (index < 0 || index >= source->frameCount())
            throw Error(ErrorCode::NotFound, "frame " + std::to_string(index) + " does not exist");
        const auto adapter = plugin->adapterFor(params);
        const auto img = source->readFrame(index);
        const auto labels = mask::inferLabels(img, *adapter, source->framePath(index));
        const auto selection = mask::SemanticMaskPlugin::selectionFrom(params);
        selection.validateFor(adapter->palette());
        const auto bytes = media::encodePng(mask::maskPreview(img, labels, selection));
        res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    }));

    s.Get("/api/plugins", guarded([this](const httplib::Request&, httplib::Response& res) {
        sendJson(res, 200, {{"plugins", _registry.describe()}, {"export", workflow::exportSchema().toJson()}});
    }));

    s.Post("/api/plugins/:id/suggest", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const json body = parseBody(req);
        const int budget = body.value("budget", 1);
        std::shared_ptr<media::FrameSource> source;
        {
            std::shared_lock lock(_stateMutex);
            if (!_session)
                throw Error(ErrorCode::NotFound, noProject);
            source = _session->source;
        }
        const auto params = core::suggestSettings(req.path_params.at("id"), *source, budget, _registry);
        sendJson(res, 200, {{"supported", params.has_value()}, {"params", params ? *params : json(nullptr)}});
    }));

    s.Post("/api/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
        json body = parseBody(req);
        sendJson(res, 202, submit(validateJob({{"kind", "export"}, {"params", body.value("params", json::object())}})).toJson());
    }));

    s.Post("/api/workflow/run", guarded([this](const httplib::Request& req, httplib::Response& res) {
        json body = parseBody(req);
        const json spec = body.contains("workflow") ? body["workflow"] : body;
        sendJson(res, 202, submit(validateJob({{"kind", "workflow"}, {"params", spec}})).toJson());
    }));

    if (!_options.staticDir.empty() && fs::is_directory(_options.staticDir))
        s.set_mount_point("/", _options.staticDir.string());
}

}  // namespace ivs::service

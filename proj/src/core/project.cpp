#include <ivs/core/project.hpp>

#include <ivs/media/codec.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace ivs::core {

namespace {

const char* const kKnownKeys[] = {"version", "source", "boundaries", "keyframes", "steps", "created_at"};

[[noreturn]] void fieldError(const std::string& field, const std::string& message)
{
    throw Error(ErrorCode::Parse, "malformed project file: field '" + field + "': " + message);
}

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object() || !obj.contains(key))
        fieldError(path + key, "missing");
    return obj.at(key);
}

FrameIndex requireIndex(const nlohmann::json& v, const std::string& field)
{
    if (!v.is_number_integer())
        fieldError(field, "expected integer");
    return v.get<FrameIndex>();
}

std::string requireString(const nlohmann::json& v, const std::string& field)
{
    if (!v.is_string())
        fieldError(field, "expected string");
    return v.get<std::string>();
}

}  // namespace

std::string canonicalDump(const nlohmann::json& j)
{
    return j.dump(2) + "\n";
}

bool isCompatibleVersion(const std::string& version)
{
    const std::string ours = kProjectVersion;
    const auto major = [](const std::string& v) { return v.substr(0, v.find('.')); };
    return !version.empty() && major(version) == major(ours);
}

std::string currentTimestamp()
{
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    else
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    ::gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json toJson(const ProjectFile& project)
{
    nlohmann::json j = project.extra.is_object() ? project.extra : nlohmann::json::object();
    j["version"] = project.version;
    j["source"] = {{"path", project.source.path},
                   {"kind", media::toString(project.source.kind)},
                   {"fps", project.source.fps ? nlohmann::json(project.source.fps->toString()) : nlohmann::json()}};
    j["boundaries"] = {{"start", project.boundaries.start}, {"end", project.boundaries.end}};
    j["keyframes"] = project.keyframes;
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : project.steps)
        steps.push_back({{"plugin", s.pluginId}, {"params", s.params}});
    j["steps"] = std::move(steps);
    j["created_at"] = project.createdAt;
    return j;
}

ProjectFile projectFromJson(const nlohmann::json& j)
{
    if (!j.is_object())
        fieldError("<root>", "expected object");

    ProjectFile p;
    p.version = requireString(require(j, "version", ""), "version");
    if (!isCompatibleVersion(p.version))
        throw Error(ErrorCode::VersionMismatch,
                    "project version " + p.version + " is not compatible with " + std::string(kProjectVersion));

    const auto& src = require(j, "source", "");
    p.source.path = requireString(require(src, "path", "source."), "source.path");
    try
    {
        p.source.kind = media::sourceKindFromString(requireString(require(src, "kind", "source."), "source.kind"));
    }
    catch (const Error& e)
    {
        fieldError("source.kind", e.what());
    }
    if (src.contains("fps") && !src["fps"].is_null())
    {
        try
        {
            p.source.fps = src["fps"].is_string() ? media::Rational::parse(src["fps"].get<std::string>())
                                                  : media::Rational::fromDouble(src["fps"].get<double>());
        }
        catch (const std::exception& e)
        {
            fieldError("source.fps", e.what());
        }
    }

    const auto& b = require(j, "boundaries", "");
    p.boundaries.start = requireIndex(require(b, "start", "boundaries."), "boundaries.start");
    p.boundaries.end = requireIndex(require(b, "end", "boundaries."), "boundaries.end");
    if (p.boundaries.start >= p.boundaries.end)
        fieldError("boundaries", "start must be < end");

    const auto& kf = require(j, "keyframes", "");
    if (!kf.is_array())
        fieldError("keyframes", "expected array");
    for (std::size_t i = 0; i < kf.size(); ++i)
        p.keyframes.push_back(requireIndex(kf[i], "keyframes[" + std::to_string(i) + "]"));

    const auto& steps = require(j, "steps", "");
    if (!steps.is_array())
        fieldError("steps", "expected array");
    for (std::size_t i = 0; i < steps.size(); ++i)
    {
        const std::string prefix = "steps[" + std::to_string(i) + "].";
        SamplerStep s;
        s.pluginId = requireString(require(steps[i], "plugin", prefix), prefix + "plugin");
        s.params = steps[i].contains("params") ? steps[i]["params"] : nlohmann::json::object();
        if (!s.params.is_object())
            fieldError(prefix + "params", "expected object");
        p.steps.push_back(std::move(s));
    }

    if (j.contains("created_at"))
        p.createdAt = requireString(j["created_at"], "created_at");

    for (const auto& [key, value] : j.items())
    {
        if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) == std::end(kKnownKeys))
            p.extra[key] = value;
    }
    return p;
}

std::string serializeProject(const ProjectFile& project)
{
    return canonicalDump(toJson(project));
}

ProjectFile parseProject(std::string_view text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw Error(ErrorCode::Parse, "project file parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    return projectFromJson(j);
}

void saveProject(const ProjectFile& project, const std::filesystem::path& path)
{
    const std::string text = serializeProject(project);
    media::writeFileBytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

ProjectFile loadProject(const std::filesystem::path& path)
{
    const auto bytes = media::readFileBytes(path);
    return parseProject(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace ivs::core

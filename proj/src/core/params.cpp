#include <ivs/core/params.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ivs::core {

namespace {

std::string joinFieldErrors(const std::string& context, const std::vector<FieldError>& fields)
{
    std::ostringstream os;
    os << context;
    for (std::size_t i = 0; i < fields.size(); ++i)
        os << (i == 0 ? ": " : "; ") << fields[i].field << ": " << fields[i].message;
    return os.str();
}

std::string formatNumber(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

bool isInteger(const nlohmann::json& v)
{
    return v.is_number_integer() || (v.is_number_float() && std::isfinite(v.get<double>()) &&
                                     std::floor(v.get<double>()) == v.get<double>());
}

}  // namespace

std::string toString(ParamType type)
{
    switch (type)
    {
        case ParamType::Integer: return "integer";
        case ParamType::Number: return "number";
        case ParamType::Boolean: return "boolean";
        case ParamType::String: return "string";
        case ParamType::Enum: return "enum";
        case ParamType::IntegerList: return "integer_list";
        case ParamType::Object: return "object";
    }
    return "unknown";
}

ValidationError::ValidationError(const std::string& context, std::vector<FieldError> fields)
  : Error(ErrorCode::Validation, joinFieldErrors(context, fields)),
    _fields(std::move(fields))
{}

const ParamSpec* ParamSchema::find(const std::string& name) const
{
    const auto it = std::find_if(_fields.begin(), _fields.end(), [&](const ParamSpec& s) { return s.name == name; });
    return it == _fields.end() ? nullptr : &*it;
}

std::vector<FieldError> ParamSchema::validate(const Params& params) const
{
    std::vector<FieldError> errors;
    if (!params.is_object())
    {
        errors.push_back({"params", "must be a JSON object"});
        return errors;
    }
    for (const auto& [key, value] : params.items())
    {
        const ParamSpec* spec = find(key);
        if (!spec)
        {
            errors.push_back({key, "unknown parameter"});
            continue;
        }
        switch (spec->type)
        {
            case ParamType::Integer:
                if (!value.is_number() || !isInteger(value))
                {
                    errors.push_back({key, "expected integer"});
                    continue;
                }
                break;
            case ParamType::Number:
                if (!value.is_number() || !std::isfinite(value.get<double>()))
                {
                    errors.push_back({key, "expected finite number"});
                    continue;
                }
                break;
            case ParamType::Boolean:
                if (!value.is_boolean())
                    errors.push_back({key, "expected boolean"});
                continue;
            case ParamType::String:
                if (!value.is_string())
                    errors.push_back({key, "expected string"});
                continue;
            case ParamType::Enum:
                if (!value.is_string() ||
                    std::find(spec->choices.begin(), spec->choices.end(), value.get<std::string>()) == spec->choices.end())
                {
                    std::string allowed;
                    for (const auto& c : spec->choices)
                        allowed += (allowed.empty() ? "" : "|") + c;
                    errors.push_back({key, "expected one of " + allowed});
                }
                continue;
            case ParamType::IntegerList:
                if (!value.is_array() || !std::all_of(value.begin(), value.end(), [](const auto& v) {
                        return v.is_number_integer() && v.template get<long long>() >= 0;
                    }))
                    errors.push_back({key, "expected list of non-negative integers"});
                continue;
            case ParamType::Object:
                if (!value.is_object() && !value.is_null())
                    errors.push_back({key, "expected object"});
                continue;
        }

        const double v = value.get<double>();
        if (spec->min && (spec->minExclusive ? v <= *spec->min : v < *spec->min))
            errors.push_back({key, std::string("must be ") + (spec->minExclusive ? "> " : ">= ") + formatNumber(*spec->min)});
        else if (spec->max && (spec->maxExclusive ? v >= *spec->max : v > *spec->max))
            errors.push_back({key, std::string("must be ") + (spec->maxExclusive ? "< " : "<= ") + formatNumber(*spec->max)});
        else if (spec->oddOnly && static_cast<long long>(v) % 2 == 0)
            errors.push_back({key, "must be odd"});
    }
    return errors;
}

Params ParamSchema::withDefaults(const Params& params) const
{
    Params out = params.is_object() ? params : Params::object();
    for (const auto& spec : _fields)
    {
        if (!out.contains(spec.name) && !spec.defaultValue.is_null())
            out[spec.name] = spec.defaultValue;
    }
    return out;
}

nlohmann::json ParamSchema::toJson() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& spec : _fields)
    {
        nlohmann::json f = {{"name", spec.name}, {"type", toString(spec.type)}, {"default", spec.defaultValue}};
        if (spec.min)
            f[spec.minExclusive ? "exclusive_min" : "min"] = *spec.min;
        if (spec.max)
            f[spec.maxExclusive ? "exclusive_max" : "max"] = *spec.max;
        if (spec.oddOnly)
            f["odd"] = true;
        if (!spec.choices.empty())
            f["choices"] = spec.choices;
        if (!spec.description.empty())
            f["description"] = spec.description;
        arr.push_back(std::move(f));
    }
    return arr;
}

}  // namespace ivs::core

#pragma once

#include <ivs/error.hpp>

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace ivs::core {

/// Plugin parameters: a JSON object of strings, numbers and booleans (lists for a few fields).
using Params = nlohmann::json;

enum class ParamType
{
    Integer,
    Number,
    Boolean,
    String,
    Enum,
    IntegerList,
    Object,
};

std::string toString(ParamType type);

struct ParamSpec
{
    std::string name;
    ParamType type = ParamType::Number;
    nlohmann::json defaultValue;  ///< null: optional without default
    std::optional<double> min;
    std::optional<double> max;
    bool minExclusive = false;
    bool maxExclusive = false;
    bool oddOnly = false;
    std::vector<std::string> choices;
    std::string description;
};

struct FieldError
{
    std::string field;
    std::string message;

    bool operator==(const FieldError&) const = default;
};

/// Raised when parameters do not satisfy a schema; carries one entry per offending field.
class ValidationError : public Error
{
public:
    ValidationError(const std::string& context, std::vector<FieldError> fields);

    const std::vector<FieldError>& fields() const { return _fields; }

private:
    std::vector<FieldError> _fields;
};

class ParamSchema
{
public:
    ParamSchema() = default;
    explicit ParamSchema(std::vector<ParamSpec> fields)
      : _fields(std::move(fields))
    {}

    const std::vector<ParamSpec>& fields() const { return _fields; }
    const ParamSpec* find(const std::string& name) const;

    /// Type, range and unknown-field checks. An empty result means valid.
    std::vector<FieldError> validate(const Params& params) const;

    /// Copy of `params` with every missing defaulted field filled in.
    Params withDefaults(const Params& params) const;

    Params defaults() const { return withDefaults(Params::object()); }

    nlohmann::json toJson() const;

private:
    std::vector<ParamSpec> _fields;
};

}  // namespace ivs::core

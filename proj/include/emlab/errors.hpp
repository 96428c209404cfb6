#pragma once

#include <stdexcept>
#include <string>

namespace emlab {

// Base for every error the library raises. `kind()` is the machine-readable
// tag the CLI writes into its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define EMLAB_DEFINE_ERROR(Name)                                             \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name, what) {}       \
    }

EMLAB_DEFINE_ERROR(NonConvergence);
EMLAB_DEFINE_ERROR(DomainError);
EMLAB_DEFINE_ERROR(DegenerateState);
EMLAB_DEFINE_ERROR(DimensionMismatch);
EMLAB_DEFINE_ERROR(NotPositiveDefinite);
EMLAB_DEFINE_ERROR(DegenerateWeights);
EMLAB_DEFINE_ERROR(InsufficientData);

#undef EMLAB_DEFINE_ERROR

// Configuration errors carry the offending field path, e.g. "init.b".
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error("ConfigError", field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace emlab

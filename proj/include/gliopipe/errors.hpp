#pragma once

#include <stdexcept>
#include <string>

namespace gliopipe {

// Base for all typed pipeline errors. The category string is what the CLI
// prints so failures stay machine-greppable.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error("[" + category + "] " + message),
          category_(std::move(category)) {}

    const std::string& category() const { return category_; }

private:
    std::string category_;
};

#define GLIOPIPE_DEFINE_ERROR(Name)                          \
    class Name : public Error {                             \
    public:                                                  \
        explicit Name(const std::string& message)            \
            : Error(#Name, message) {}                       \
    }

GLIOPIPE_DEFINE_ERROR(IoError);
GLIOPIPE_DEFINE_ERROR(IngestError);
GLIOPIPE_DEFINE_ERROR(LabelError);
GLIOPIPE_DEFINE_ERROR(SpecError);
GLIOPIPE_DEFINE_ERROR(CropError);
GLIOPIPE_DEFINE_ERROR(ShapeError);
GLIOPIPE_DEFINE_ERROR(ConfigError);
GLIOPIPE_DEFINE_ERROR(DataError);
GLIOPIPE_DEFINE_ERROR(DivergenceError);
GLIOPIPE_DEFINE_ERROR(EmptyRegionError);
GLIOPIPE_DEFINE_ERROR(CapabilityError);

#undef GLIOPIPE_DEFINE_ERROR

}  // namespace gliopipe

#pragma once

#include <stdexcept>
#include <string>

namespace dryfric {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested phase constants do not exist for these parameters.
struct NoSuchPhase : Error {
    explicit NoSuchPhase(const std::string& msg) : Error(msg) {}
};

// Scan + bisection found neither a sign change nor a grazing dip.
struct NoRootInHorizon : Error {
    explicit NoRootInHorizon(const std::string& msg) : Error(msg) {}
};

struct InvalidPhase : Error {
    explicit InvalidPhase(const std::string& msg) : Error(msg) {}
};

struct CoveringNotFound : Error {
    explicit CoveringNotFound(const std::string& msg) : Error(msg) {}
};

struct ScanTooCoarse : Error {
    explicit ScanTooCoarse(const std::string& msg) : Error(msg) {}
};

struct NoSignChange : Error {
    explicit NoSignChange(const std::string& msg) : Error(msg) {}
};

struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& msg) : Error(msg) {}
};

struct HorizonExceeded : Error {
    explicit HorizonExceeded(const std::string& msg) : Error(msg) {}
};

struct PenetrationDetected : Error {
    explicit PenetrationDetected(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace dryfric

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace lossq {

// Invalid distribution/model parameters or violated mode preconditions.
// Maps to a nonzero CLI exit carrying the message.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Query outside the support of a distribution (e.g. residual life past the
// endpoint of a bounded law).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Too few records to form an estimate.
class EstimationError : public std::runtime_error {
public:
    explicit EstimationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A single busy cycle exceeded the event guard. Replication drivers attach
// the index of the offending stream before propagating.
class RunawayCycleError : public std::runtime_error {
public:
    RunawayCycleError(std::uint64_t event_limit,
                      std::optional<std::uint64_t> stream = std::nullopt)
        : std::runtime_error(format(event_limit, stream)),
          event_limit_(event_limit),
          stream_(stream) {}

    std::uint64_t event_limit() const { return event_limit_; }
    std::optional<std::uint64_t> stream() const { return stream_; }

private:
    static std::string format(std::uint64_t limit, std::optional<std::uint64_t> stream) {
        std::string msg = "busy cycle exceeded " + std::to_string(limit) + " events";
        if (stream) msg += " (stream " + std::to_string(*stream) + ")";
        return msg;
    }

    std::uint64_t event_limit_;
    std::optional<std::uint64_t> stream_;
};

}  // namespace lossq

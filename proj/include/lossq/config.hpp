#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lossq/engine.hpp"

namespace lossq {

enum class RunMode { Simulate, VerifyTheorem, VerifyLemma, Oracle, ClassifyDist };
enum class OutputFormat { Csv, Report };

std::string to_string(RunMode m);

// One experiment = one JSON document. Parsing is strict: unknown keys are
// rejected everywhere, distribution parameters are range-checked.
struct ExperimentConfig {
    RunMode mode = RunMode::Simulate;
    std::optional<QueueModel> model;        // required except classify-dist
    std::optional<DistributionSpec> dist;   // classify-dist only
    std::size_t num_cycles = 100000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::vector<double> sweep;              // capacity values; empty = model capacity
    double level = 0.95;
    double alpha = 0.01;
    std::optional<std::string> out_path;
    OutputFormat format = OutputFormat::Report;
    std::vector<std::string> warnings;      // non-fatal normalizations
};

// Parses and validates the document structure. `mode` may come from the
// document or be imposed by the caller (CLI subcommand); when both are
// given they must agree.
ExperimentConfig parse_config(const std::string& json_text,
                              std::optional<RunMode> forced_mode = std::nullopt);

// Mode-specific hypotheses for one capacity value. Throws ConfigError
// naming the violated condition.
void validate_mode_requirements(const ExperimentConfig& config, double capacity);

}  // namespace lossq

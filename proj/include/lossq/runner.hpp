#pragma once

#include <iosfwd>

#include "lossq/config.hpp"

namespace lossq {

// Executes one experiment. The payload (CSV or text report) is written to
// config.out_path when set, otherwise to `out`; verdict and summary lines
// go to `out`, warnings and progress notes to `err`. All file writes happen
// once, at the end.
//
// `trace` (simulate mode, workers == 1 only) receives one line per event.
//
// Returns 0 when every verdict passes, 1 otherwise. Throws ConfigError for
// invalid configurations and RunawayCycleError from the engine guard.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err,
        std::ostream* trace = nullptr);

}  // namespace lossq

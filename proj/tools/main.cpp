#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lossq/errors.hpp"
#include "lossq/runner.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> cycles;
    std::optional<unsigned> workers;
    std::optional<std::string> out_path;
    std::optional<std::string> format;
    bool trace = false;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool with_trace) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--cycles", args.cycles, "override the number of cycles");
    cmd->add_option("--workers", args.workers, "override the worker count");
    cmd->add_option("--out", args.out_path, "override the output path");
    cmd->add_option("--format", args.format, "output format (csv|report)")
        ->check(CLI::IsMember({"csv", "report"}));
    if (with_trace)
        cmd->add_flag("--trace", args.trace, "emit one event line per event to stderr");
}

int execute(lossq::RunMode mode, const CommonArgs& args) {
    std::ifstream file(args.config_path);
    std::ostringstream buffer;
    buffer << file.rdbuf();

    lossq::ExperimentConfig config = lossq::parse_config(buffer.str(), mode);
    if (args.seed) config.seed = *args.seed;
    if (args.cycles) config.num_cycles = *args.cycles;
    if (args.workers) config.workers = *args.workers;
    if (args.out_path) config.out_path = *args.out_path;
    if (args.format)
        config.format = *args.format == "csv" ? lossq::OutputFormat::Csv
                                              : lossq::OutputFormat::Report;

    return lossq::run(config, std::cout, std::cerr, args.trace ? &std::cerr : nullptr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and exact analysis of batch-arrival batch-service loss queues"};
    app.require_subcommand(1);

    struct Sub {
        lossq::RunMode mode;
        CLI::App* cmd;
        CommonArgs args;
    };
    std::vector<Sub> subs;
    subs.push_back({lossq::RunMode::Simulate,
                    app.add_subcommand("simulate", "estimate per-cycle quantities"), {}});
    subs.push_back({lossq::RunMode::VerifyTheorem,
                    app.add_subcommand("verify-theorem",
                                       "check E M_L = E X_1 under the equality conditions"),
                    {}});
    subs.push_back({lossq::RunMode::VerifyLemma,
                    app.add_subcommand("verify-lemma",
                                       "one-sided test of E M_L > E X_1 for NWUE arrivals"),
                    {}});
    subs.push_back({lossq::RunMode::Oracle,
                    app.add_subcommand("oracle", "exact E M_L for the lattice instance"), {}});
    subs.push_back({lossq::RunMode::ClassifyDist,
                    app.add_subcommand("classify-dist", "aging class and mean residual life"),
                    {}});
    for (auto& sub : subs)
        add_common_flags(sub.cmd, sub.args, sub.mode == lossq::RunMode::Simulate);

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& sub : subs)
            if (sub.cmd->parsed()) return execute(sub.mode, sub.args);
    } catch (const lossq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lossq::RunawayCycleError& e) {
        std::cerr << "runaway cycle: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

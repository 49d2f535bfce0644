#include "lossq/runner.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "lossq/errors.hpp"
#include "lossq/oracle.hpp"
#include "lossq/stats.hpp"

namespace lossq {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

std::vector<double> capacities(const ExperimentConfig& config) {
    if (!config.sweep.empty()) return config.sweep;
    return {config.model->capacity};
}

void write_payload(const ExperimentConfig& config, const std::string& payload,
                   std::ostream& out) {
    if (config.out_path) {
        std::ofstream file(*config.out_path, std::ios::binary);
        if (!file) throw ConfigError("cannot open output path '" + *config.out_path + "'");
        file << payload;
    } else {
        out << payload;
    }
}

std::vector<CycleRecord> produce_records(const ExperimentConfig& config,
                                         const QueueModel& model, std::ostream* trace) {
    if (!trace) return run_cycles(model, config.num_cycles, config.seed, config.workers);
    std::vector<CycleRecord> records;
    records.reserve(config.num_cycles);
    for (std::size_t k = 0; k < config.num_cycles; ++k) {
        RandomStream rng(config.seed, k);
        records.push_back(simulate_cycle(model, rng, trace));
    }
    return records;
}

int run_estimation_modes(const ExperimentConfig& config, std::ostream& out,
                         std::ostream& err, std::ostream* trace) {
    std::string csv = report_csv_header() + "\n";
    std::string text;
    bool all_pass = true;

    for (double n : capacities(config)) {
        validate_mode_requirements(config, n);
        QueueModel model = *config.model;
        model.capacity = n;
        const auto records = produce_records(config, model, trace);
        EstimateReport report = summarize(records, model, config.level, config.seed);

        if (config.mode == RunMode::VerifyTheorem) {
            const auto verdict = test_theorem_equality(records, report.ex1, config.level);
            report.verdict = to_string(verdict);
            all_pass = all_pass && verdict == TheoremVerdict::Consistent;
            err << "n = " << fmt(n) << ": E M_L in [" << fmt(report.mass_lost.lo) << ", "
                << fmt(report.mass_lost.hi) << "], E X_1 = " << fmt(report.ex1) << " -> "
                << report.verdict << "\n";
        } else if (config.mode == RunMode::VerifyLemma) {
            const auto verdict = test_lemma_inequality(records, model, config.alpha);
            report.verdict = to_string(verdict);
            all_pass = all_pass && verdict == LemmaVerdict::StrictlyGreater;
            err << "n = " << fmt(n) << ": mean M_L = " << fmt(report.mass_lost.point)
                << " vs E X_1 = " << fmt(report.ex1) << " -> " << report.verdict << "\n";
        }

        csv += report_csv_row(report) + "\n";
        text += report_text(report) + "\n";
    }

    write_payload(config, config.format == OutputFormat::Csv ? csv : text, out);
    if (config.mode != RunMode::Simulate) {
        const char* label = config.mode == RunMode::VerifyTheorem ? "theorem" : "lemma";
        err << label << " verification: " << (all_pass ? "PASS" : "FAIL") << "\n";
        return all_pass ? 0 : 1;
    }
    return 0;
}

int run_oracle(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    std::string csv = "lambda,b,d,k,ex1,ad_over_b,oracle_ml,truncation,theorem_check\n";
    std::string text;
    bool any_fail = false;

    for (double n : capacities(config)) {
        validate_mode_requirements(config, n);
        QueueModel qm = *config.model;
        qm.capacity = n;
        const LatticeModel lattice = lattice_model_from_queue(qm);
        const OracleResult result = exact_expected_loss_per_cycle(lattice);
        const double ex1 = lattice_ex1(lattice);
        const double adb = lattice_ad_over_b(lattice);

        std::string check = "na";
        if (std::abs(ex1 - adb) < 1e-9) {
            const bool ok = std::abs(result.expected_loss_per_cycle - ex1) <= 1e-8;
            check = ok ? "pass" : "fail";
            any_fail = any_fail || !ok;
        }

        csv += fmt(lattice.arrival_rate) + "," + fmt(lattice.service_time) + "," +
               fmt(lattice.span) + "," + std::to_string(lattice.levels) + "," + fmt(ex1) + "," +
               fmt(adb) + "," + fmt(result.expected_loss_per_cycle) + "," +
               fmt(result.truncated_tail) + "," + check + "\n";
        text += "n = " + fmt(n) + " (K = " + std::to_string(lattice.levels) +
                "): exact E M_L = " + fmt(result.expected_loss_per_cycle) +
                ", E X_1 = " + fmt(ex1) + ", a*d/b = " + fmt(adb) +
                ", truncated tail = " + fmt(result.truncated_tail) +
                ", theorem check = " + check + "\n";
        err << "n = " << fmt(n) << ": oracle E M_L = " << fmt(result.expected_loss_per_cycle)
            << " (theorem check " << check << ")\n";
    }

    write_payload(config, config.format == OutputFormat::Csv ? csv : text, out);
    return any_fail ? 1 : 0;
}

int run_classify(const ExperimentConfig& config, std::ostream& out) {
    const DistributionSpec& dist = *config.dist;
    const AgingClass cls = classify_aging(dist);
    const double m = mean(dist);
    const double hi = max_support(dist);

    std::string csv = "family,aging_class,mean,x,mrl\n";
    std::string text = "family = " + family_name(dist) + ", aging class = " + to_string(cls) +
                       ", mean = " + fmt(m) + "\n";
    for (int q = 0; q <= 20; ++q) {
        const double x = 0.25 * static_cast<double>(q) * m;
        if (x >= hi || !(survival(dist, x) > 0.0)) break;
        const double r = mean_residual_life(dist, x);
        csv += family_name(dist) + "," + to_string(cls) + "," + fmt(m) + "," + fmt(x) + "," +
               fmt(r) + "\n";
        text += "  mrl(" + fmt(x) + ") = " + fmt(r) + "\n";
    }
    write_payload(config, config.format == OutputFormat::Csv ? csv : text, out);
    return 0;
}

}  // namespace

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err,
        std::ostream* trace) {
    for (const auto& w : config.warnings) err << "warning: " << w << "\n";
    if (trace && (config.mode != RunMode::Simulate || config.workers != 1))
        throw ConfigError("trace mode requires simulate mode with workers = 1");

    switch (config.mode) {
        case RunMode::Simulate:
        case RunMode::VerifyTheorem:
        case RunMode::VerifyLemma:
            return run_estimation_modes(config, out, err, trace);
        case RunMode::Oracle:
            return run_oracle(config, out, err);
        case RunMode::ClassifyDist:
            return run_classify(config, out);
    }
    return 0;
}

}  // namespace lossq

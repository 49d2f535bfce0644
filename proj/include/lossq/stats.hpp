#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "lossq/engine.hpp"

namespace lossq {

enum class CycleField {
    Arrivals,
    Services,
    MassArrived,
    MassServed,
    MassLost,
    BusyLength,
    IdleLength,
    CycleLength,
};

double field_value(const CycleRecord& rec, CycleField field);

// Standard normal quantile, |error| < 1e-12 over (0,1).
double normal_quantile(double p);

struct Estimate {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double se = 0.0;
};

// Point estimate and normal-approximation confidence interval over i.i.d.
// cycles. Throws EstimationError on fewer than 2 records.
Estimate regenerative_estimate(std::span<const CycleRecord> records, CycleField field,
                               double level = 0.95);

// Residuals of the two renewal-reward identities over a cycle:
//   r1 = mean(M_A) - E X_1 * mean(N_A)
//   r2 = a * mean(N_A) - b * mean(N_S) - mean(I)
// Both are means of per-cycle linear combinations, so the standard errors
// come directly from the cycle-level samples. Population means (E X_1, a, b)
// are analytic, never re-estimated.
struct WaldResiduals {
    double r1 = 0.0;
    double r1_se = 0.0;
    double r2 = 0.0;
    double r2_se = 0.0;
};

WaldResiduals wald_residuals(std::span<const CycleRecord> records, const QueueModel& model);

enum class FlagStatus { Holds, Violated, NotApplicable };
std::string to_string(FlagStatus s);

// Inequality checks with a 3-standard-error slack:
//   count_bound:  a * mean(N_A) - a >= b * mean(N_S)
//   served_bound:  mean(M_S) <= mean(N_S) * E Y_1, strict when the gap clears 3 SE
//         and Y_1 is nontrivial
//   idle: mean(I) >= a, asserted only for NWUE (or boundary) interarrivals
struct BoundChecks {
    FlagStatus count_bound = FlagStatus::NotApplicable;
    FlagStatus served_bound = FlagStatus::NotApplicable;
    FlagStatus idle = FlagStatus::NotApplicable;
    bool served_strict = false;
    double count_margin = 0.0;  // a*mean(N_A) - a - b*mean(N_S)
    double count_se = 0.0;
    double served_gap = 0.0;     // E Y_1 * mean(N_S) - mean(M_S)
    double served_se = 0.0;
    double idle_mean = 0.0;
    double idle_se = 0.0;
    double a = 0.0;
};

BoundChecks bound_checks(std::span<const CycleRecord> records, const QueueModel& model);

enum class TheoremVerdict { Consistent, ViolatedHigh, ViolatedLow };
enum class LemmaVerdict { StrictlyGreater, Inconclusive };

std::string to_string(TheoremVerdict v);
std::string to_string(LemmaVerdict v);

// Consistent iff the level-confidence interval of mean(M_L) contains the
// expected value.
TheoremVerdict test_theorem_equality(std::span<const CycleRecord> records, double expected,
                                     double level = 0.95);

// Throws ConfigError naming the first violated condition: NWUE interarrivals,
// mass-rate ordering, P{X_1 <= n} > 0, nontrivial Y_1.
void check_lemma_preconditions(const QueueModel& model);

// One-sided test of mean(M_L) > E X_1 at significance alpha. Checks the
// lemma preconditions first.
LemmaVerdict test_lemma_inequality(std::span<const CycleRecord> records,
                                   const QueueModel& model, double alpha = 0.01);

struct EstimateReport {
    std::size_t num_cycles = 0;
    std::uint64_t seed = 0;
    double level = 0.95;
    double capacity = 0.0;
    Policy policy = Policy::FullRejection;
    Estimate arrivals, services, mass_arrived, mass_served, mass_lost, busy_length, idle;
    WaldResiduals wald;
    BoundChecks bounds;
    double ex1 = 0.0;
    double ey1 = 0.0;
    double a = 0.0;
    double b = 0.0;
    std::string verdict = "na";  // filled by the verify modes
};

EstimateReport summarize(std::span<const CycleRecord> records, const QueueModel& model,
                         double level, std::uint64_t seed);

// Flat CSV row with frozen column names; new columns append only.
std::string report_csv_header();
std::string report_csv_row(const EstimateReport& report);
std::string report_text(const EstimateReport& report);

}  // namespace lossq

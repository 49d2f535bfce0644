#include "lossq/stats.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lossq/errors.hpp"

namespace lossq {

namespace {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

template <typename Fn>
MeanSe mean_se(std::span<const CycleRecord> records, Fn&& value) {
    MeanSe out;
    out.n = records.size();
    if (out.n < 2) throw EstimationError("need at least 2 cycle records");
    double sum = 0.0;
    for (const auto& r : records) sum += value(r);
    const double n = static_cast<double>(out.n);
    out.mean = sum / n;
    double ss = 0.0;
    for (const auto& r : records) {
        const double d = value(r) - out.mean;
        ss += d * d;
    }
    out.se = std::sqrt(ss / (n - 1.0) / n);
    return out;
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

}  // namespace

double field_value(const CycleRecord& rec, CycleField field) {
    switch (field) {
        case CycleField::Arrivals: return static_cast<double>(rec.n_arrivals);
        case CycleField::Services: return static_cast<double>(rec.n_services);
        case CycleField::MassArrived: return rec.mass_arrived;
        case CycleField::MassServed: return rec.mass_served;
        case CycleField::MassLost: return rec.mass_lost;
        case CycleField::BusyLength: return rec.busy_length;
        case CycleField::IdleLength: return rec.idle_length;
        case CycleField::CycleLength: return rec.cycle_length;
    }
    return 0.0;
}

// Acklam's rational approximation with one Halley refinement through erfc.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile requires p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

Estimate regenerative_estimate(std::span<const CycleRecord> records, CycleField field,
                               double level) {
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0,1)");
    const auto ms = mean_se(records, [&](const CycleRecord& r) { return field_value(r, field); });
    const double z = normal_quantile(0.5 * (1.0 + level));
    return {ms.mean, ms.mean - z * ms.se, ms.mean + z * ms.se, ms.se};
}

WaldResiduals wald_residuals(std::span<const CycleRecord> records, const QueueModel& model) {
    const double ex1 = mean(model.arrival_batch);
    const double a = mean(model.interarrival);
    const double b = mean(model.service_time);
    const auto z1 = mean_se(records, [&](const CycleRecord& r) {
        return r.mass_arrived - ex1 * static_cast<double>(r.n_arrivals);
    });
    const auto z2 = mean_se(records, [&](const CycleRecord& r) {
        return a * static_cast<double>(r.n_arrivals) -
               b * static_cast<double>(r.n_services) - r.idle_length;
    });
    return {z1.mean, z1.se, z2.mean, z2.se};
}

std::string to_string(FlagStatus s) {
    switch (s) {
        case FlagStatus::Holds: return "holds";
        case FlagStatus::Violated: return "violated";
        case FlagStatus::NotApplicable: return "na";
    }
    return "na";
}

BoundChecks bound_checks(std::span<const CycleRecord> records, const QueueModel& model) {
    const double a = mean(model.interarrival);
    const double b = mean(model.service_time);
    const double ey1 = mean(model.service_batch);

    BoundChecks out;
    out.a = a;

    const auto g = mean_se(records, [&](const CycleRecord& r) {
        return a * static_cast<double>(r.n_arrivals) - b * static_cast<double>(r.n_services);
    });
    out.count_margin = g.mean - a;
    out.count_se = g.se;
    out.count_bound = out.count_margin >= -3.0 * g.se ? FlagStatus::Holds : FlagStatus::Violated;

    const auto gap = mean_se(records, [&](const CycleRecord& r) {
        return ey1 * static_cast<double>(r.n_services) - r.mass_served;
    });
    out.served_gap = gap.mean;
    out.served_se = gap.se;
    out.served_bound = gap.mean >= -3.0 * gap.se ? FlagStatus::Holds : FlagStatus::Violated;
    out.served_strict = gap.mean > 3.0 * gap.se && !is_point_mass(model.service_batch);

    const auto idle = mean_se(records, [&](const CycleRecord& r) { return r.idle_length; });
    out.idle_mean = idle.mean;
    out.idle_se = idle.se;
    const AgingClass cls = classify_aging(model.interarrival);
    if (cls == AgingClass::NWUE || cls == AgingClass::Both)
        out.idle = idle.mean >= a - 3.0 * idle.se ? FlagStatus::Holds : FlagStatus::Violated;
    return out;
}

std::string to_string(TheoremVerdict v) {
    switch (v) {
        case TheoremVerdict::Consistent: return "consistent";
        case TheoremVerdict::ViolatedHigh: return "violated-high";
        case TheoremVerdict::ViolatedLow: return "violated-low";
    }
    return "consistent";
}

std::string to_string(LemmaVerdict v) {
    return v == LemmaVerdict::StrictlyGreater ? "strictly-greater" : "inconclusive";
}

TheoremVerdict test_theorem_equality(std::span<const CycleRecord> records, double expected,
                                     double level) {
    const Estimate est = regenerative_estimate(records, CycleField::MassLost, level);
    if (est.lo > expected) return TheoremVerdict::ViolatedHigh;
    if (est.hi < expected) return TheoremVerdict::ViolatedLow;
    return TheoremVerdict::Consistent;
}

void check_lemma_preconditions(const QueueModel& model) {
    const AgingClass cls = classify_aging(model.interarrival);
    if (cls != AgingClass::NWUE && cls != AgingClass::Both)
        throw ConfigError("interarrival distribution must belong to the class NWUE");
    const double a = mean(model.interarrival);
    const double b = mean(model.service_time);
    if (mean(model.arrival_batch) / a < mean(model.service_batch) / b)
        throw ConfigError("(1/a) E X_1 must be >= (1/b) E Y_1");
    if (!(cdf(model.arrival_batch, model.capacity) > 0.0))
        throw ConfigError("P{X_1 <= n} must be positive");
    if (is_point_mass(model.service_batch))
        throw ConfigError("Y_1 must be nontrivial (at least two values)");
}

LemmaVerdict test_lemma_inequality(std::span<const CycleRecord> records,
                                   const QueueModel& model, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    check_lemma_preconditions(model);
    const double expected = mean(model.arrival_batch);
    const auto ml = mean_se(records, [](const CycleRecord& r) { return r.mass_lost; });
    const double excess = ml.mean - expected;
    if (ml.se == 0.0) return excess > 0.0 ? LemmaVerdict::StrictlyGreater : LemmaVerdict::Inconclusive;
    return excess > normal_quantile(1.0 - alpha) * ml.se ? LemmaVerdict::StrictlyGreater
                                                         : LemmaVerdict::Inconclusive;
}

EstimateReport summarize(std::span<const CycleRecord> records, const QueueModel& model,
                         double level, std::uint64_t seed) {
    EstimateReport rep;
    rep.num_cycles = records.size();
    rep.seed = seed;
    rep.level = level;
    rep.capacity = model.capacity;
    rep.policy = model.policy;
    rep.arrivals = regenerative_estimate(records, CycleField::Arrivals, level);
    rep.services = regenerative_estimate(records, CycleField::Services, level);
    rep.mass_arrived = regenerative_estimate(records, CycleField::MassArrived, level);
    rep.mass_served = regenerative_estimate(records, CycleField::MassServed, level);
    rep.mass_lost = regenerative_estimate(records, CycleField::MassLost, level);
    rep.busy_length = regenerative_estimate(records, CycleField::BusyLength, level);
    rep.idle = regenerative_estimate(records, CycleField::IdleLength, level);
    rep.wald = wald_residuals(records, model);
    rep.bounds = bound_checks(records, model);
    rep.ex1 = mean(model.arrival_batch);
    rep.ey1 = mean(model.service_batch);
    rep.a = mean(model.interarrival);
    rep.b = mean(model.service_time);
    return rep;
}

std::string report_csv_header() {
    return "n,policy,cycles,seed,ml_mean,ml_lo,ml_hi,ex1,verdict,r1,r1_se,r2,r2_se,idle_mean,a";
}

std::string report_csv_row(const EstimateReport& r) {
    std::string row;
    row += format_double(r.capacity);
    row += ',';
    row += to_string(r.policy);
    row += ',';
    row += std::to_string(r.num_cycles);
    row += ',';
    row += std::to_string(r.seed);
    for (double v : {r.mass_lost.point, r.mass_lost.lo, r.mass_lost.hi, r.ex1}) {
        row += ',';
        row += format_double(v);
    }
    row += ',';
    row += r.verdict;
    for (double v : {r.wald.r1, r.wald.r1_se, r.wald.r2, r.wald.r2_se, r.bounds.idle_mean, r.a}) {
        row += ',';
        row += format_double(v);
    }
    return row;
}

std::string report_text(const EstimateReport& r) {
    std::ostringstream os;
    auto line = [&](const char* name, const Estimate& e) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "  %-14s %.6g   [%.6g, %.6g]\n", name, e.point, e.lo, e.hi);
        os << buf;
    };
    os << "capacity n = " << format_double(r.capacity) << "  policy = " << to_string(r.policy)
       << "  cycles = " << r.num_cycles << "  seed = " << r.seed << "\n";
    os << "estimates (level " << format_double(r.level) << "):\n";
    line("N_A", r.arrivals);
    line("N_S", r.services);
    line("M_A", r.mass_arrived);
    line("M_S", r.mass_served);
    line("M_L", r.mass_lost);
    line("busy", r.busy_length);
    line("idle", r.idle);
    char buf[200];
    std::snprintf(buf, sizeof(buf), "wald residuals: r1 = %.6g (se %.3g), r2 = %.6g (se %.3g)\n",
                  r.wald.r1, r.wald.r1_se, r.wald.r2, r.wald.r2_se);
    os << buf;
    std::snprintf(buf, sizeof(buf),
                  "bounds: counts %s (margin %.6g, se %.3g); served mass %s%s (gap %.6g, se %.3g); "
                  "idle %s (mean %.6g, a %.6g)\n",
                  to_string(r.bounds.count_bound).c_str(), r.bounds.count_margin, r.bounds.count_se,
                  to_string(r.bounds.served_bound).c_str(), r.bounds.served_strict ? " (strict)" : "",
                  r.bounds.served_gap, r.bounds.served_se, to_string(r.bounds.idle).c_str(),
                  r.bounds.idle_mean, r.bounds.a);
    os << buf;
    std::snprintf(buf, sizeof(buf), "population: E X_1 = %.6g, E Y_1 = %.6g, a = %.6g, b = %.6g\n",
                  r.ex1, r.ey1, r.a, r.b);
    os << buf;
    os << "verdict: " << r.verdict << "\n";
    return os.str();
}

}  // namespace lossq

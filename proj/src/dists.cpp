#include "lossq/dists.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "lossq/errors.hpp"

namespace lossq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbSumTol = 1e-12;
constexpr double kSurvivalCutoff = 1e-14;
constexpr double kQuadTol = 1e-9;

void check_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(std::string(field) + " must be strictly positive");
}

void check_prob_vector(const std::vector<double>& p, const char* field) {
    if (p.empty()) throw ConfigError(std::string(field) + " must be nonempty");
    double sum = 0.0;
    for (double v : p) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(field) + " entries must be strictly positive");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kProbSumTol)
        throw ConfigError(std::string(field) + " must sum to 1 (got " + std::to_string(sum) + ")");
}

double exp_draw(double rate, RandomStream& rng) {
    return -std::log(rng.next_unit()) / rate;
}

// P{Poisson(m) < k} = Erlang(k, rate) survival at x with m = rate*x.
// Terms never exceed 1, so no overflow for any m.
double erlang_survival(int shape, double m) {
    double term = std::exp(-m);
    double sum = term;
    for (int i = 1; i < shape; ++i) {
        term *= m / static_cast<double>(i);
        sum += term;
    }
    return std::min(sum, 1.0);
}

// Adaptive Simpson on [a,b] with absolute tolerance.
double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Integral of the survival function from x to the point where it drops
// below the tail cutoff.
double integrate_survival_tail(const std::function<double(double)>& surv,
                               double x, double scale, double tol) {
    double step = std::max(scale, 1e-6);
    double upper = x + step;
    while (surv(upper) >= kSurvivalCutoff) {
        step *= 2.0;
        upper = x + step;
        if (!std::isfinite(upper))
            throw DomainError("survival function does not decay to the cutoff");
    }
    return integrate(surv, x, upper, std::max(tol, 1e-18));
}

struct MeanVisitor {
    double operator()(const Exponential& d) const { return 1.0 / d.rate; }
    double operator()(const Deterministic& d) const { return d.value; }
    double operator()(const Erlang& d) const { return static_cast<double>(d.shape) / d.rate; }
    double operator()(const HyperExponential& d) const {
        double m = 0.0;
        for (std::size_t i = 0; i < d.rates.size(); ++i) m += d.weights[i] / d.rates[i];
        return m;
    }
    double operator()(const Uniform& d) const { return 0.5 * (d.lo + d.hi); }
    double operator()(const LatticeDiscrete& d) const {
        double m = 0.0;
        for (std::size_t i = 0; i < d.multipliers.size(); ++i)
            m += d.probs[i] * static_cast<double>(d.multipliers[i]);
        return m * d.span;
    }
};

}  // namespace

std::string to_string(AgingClass c) {
    switch (c) {
        case AgingClass::NBUE: return "nbue";
        case AgingClass::NWUE: return "nwue";
        case AgingClass::Both: return "both";
        case AgingClass::Unknown: return "unknown";
    }
    return "unknown";
}

std::string family_name(const DistributionSpec& spec) {
    struct V {
        std::string operator()(const Exponential&) const { return "exponential"; }
        std::string operator()(const Deterministic&) const { return "deterministic"; }
        std::string operator()(const Erlang&) const { return "erlang"; }
        std::string operator()(const HyperExponential&) const { return "hyperexp"; }
        std::string operator()(const Uniform&) const { return "uniform"; }
        std::string operator()(const LatticeDiscrete&) const { return "lattice"; }
    };
    return std::visit(V{}, spec);
}

DistributionSpec make_exponential(double rate) {
    check_positive(rate, "rate");
    return Exponential{rate};
}

DistributionSpec make_deterministic(double value) {
    check_positive(value, "value");
    return Deterministic{value};
}

DistributionSpec make_erlang(int shape, double rate) {
    if (shape < 1) throw ConfigError("shape must be a positive integer");
    check_positive(rate, "rate");
    return Erlang{shape, rate};
}

DistributionSpec make_hyperexponential(std::vector<double> weights,
                                       std::vector<double> rates) {
    if (weights.size() != rates.size())
        throw ConfigError("weights and rates must have the same length");
    check_prob_vector(weights, "weights");
    for (double r : rates) check_positive(r, "rate");
    return HyperExponential{std::move(weights), std::move(rates)};
}

DistributionSpec make_uniform(double lo, double hi) {
    if (lo < 0.0 || !std::isfinite(lo)) throw ConfigError("lo must be nonnegative");
    if (!(hi > lo) || !std::isfinite(hi)) throw ConfigError("hi must exceed lo");
    return Uniform{lo, hi};
}

DistributionSpec make_lattice(double span, std::vector<int> multipliers,
                              std::vector<double> probs) {
    check_positive(span, "span");
    if (multipliers.empty() || multipliers.size() != probs.size())
        throw ConfigError("multipliers and probs must be nonempty and of equal length");
    for (int m : multipliers)
        if (m < 1) throw ConfigError("multipliers must be positive integers");
    check_prob_vector(probs, "probs");
    std::vector<std::size_t> order(multipliers.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return multipliers[a] < multipliers[b]; });
    std::vector<int> mult;
    std::vector<double> prob;
    for (std::size_t idx : order) {
        if (!mult.empty() && mult.back() == multipliers[idx])
            throw ConfigError("multipliers must be distinct");
        mult.push_back(multipliers[idx]);
        prob.push_back(probs[idx]);
    }
    // Fold a common factor into the span so the stored span is the true one.
    int g = 0;
    for (int m : mult) g = std::gcd(g, m);
    if (g > 1) {
        for (int& m : mult) m /= g;
        span *= static_cast<double>(g);
    }
    return LatticeDiscrete{span, std::move(mult), std::move(prob)};
}

void validate(const DistributionSpec& spec) {
    struct V {
        void operator()(const Exponential& d) const { make_exponential(d.rate); }
        void operator()(const Deterministic& d) const { make_deterministic(d.value); }
        void operator()(const Erlang& d) const { make_erlang(d.shape, d.rate); }
        void operator()(const HyperExponential& d) const {
            make_hyperexponential(d.weights, d.rates);
        }
        void operator()(const Uniform& d) const { make_uniform(d.lo, d.hi); }
        void operator()(const LatticeDiscrete& d) const {
            auto normalized = make_lattice(d.span, d.multipliers, d.probs);
            const auto& lat = std::get<LatticeDiscrete>(normalized);
            if (lat.multipliers != d.multipliers)
                throw ConfigError("lattice multipliers must be sorted ascending with gcd 1");
        }
    };
    std::visit(V{}, spec);
}

double sample(const DistributionSpec& spec, RandomStream& rng) {
    struct V {
        RandomStream& rng;
        double operator()(const Exponential& d) const { return exp_draw(d.rate, rng); }
        double operator()(const Deterministic& d) const { return d.value; }
        double operator()(const Erlang& d) const {
            // Product of uniforms: one log per ~250 stages, flushed before
            // the product can underflow.
            double acc = 0.0;
            double prod = 1.0;
            for (int i = 0; i < d.shape; ++i) {
                prod *= rng.next_unit();
                if (prod < 1e-280) {
                    acc += std::log(prod);
                    prod = 1.0;
                }
            }
            return -(acc + std::log(prod)) / d.rate;
        }
        double operator()(const HyperExponential& d) const {
            double u = rng.next_unit();
            std::size_t k = 0;
            for (; k + 1 < d.weights.size(); ++k) {
                if (u < d.weights[k]) break;
                u -= d.weights[k];
            }
            return exp_draw(d.rates[k], rng);
        }
        double operator()(const Uniform& d) const {
            return d.lo + (d.hi - d.lo) * rng.next_unit();
        }
        double operator()(const LatticeDiscrete& d) const {
            double u = rng.next_unit();
            std::size_t k = 0;
            for (; k + 1 < d.probs.size(); ++k) {
                if (u < d.probs[k]) break;
                u -= d.probs[k];
            }
            return d.span * static_cast<double>(d.multipliers[k]);
        }
    };
    return std::visit(V{rng}, spec);
}

double mean(const DistributionSpec& spec) { return std::visit(MeanVisitor{}, spec); }

double cdf(const DistributionSpec& spec, double x) {
    struct V {
        double x;
        double operator()(const Exponential& d) const {
            return x <= 0.0 ? 0.0 : -std::expm1(-d.rate * x);
        }
        double operator()(const Deterministic& d) const { return x >= d.value ? 1.0 : 0.0; }
        double operator()(const Erlang& d) const {
            return x <= 0.0 ? 0.0 : 1.0 - erlang_survival(d.shape, d.rate * x);
        }
        double operator()(const HyperExponential& d) const {
            if (x <= 0.0) return 0.0;
            double s = 0.0;
            for (std::size_t i = 0; i < d.rates.size(); ++i)
                s += d.weights[i] * -std::expm1(-d.rates[i] * x);
            return s;
        }
        double operator()(const Uniform& d) const {
            if (x <= d.lo) return 0.0;
            if (x >= d.hi) return 1.0;
            return (x - d.lo) / (d.hi - d.lo);
        }
        double operator()(const LatticeDiscrete& d) const {
            double s = 0.0;
            for (std::size_t i = 0; i < d.multipliers.size(); ++i)
                if (d.span * static_cast<double>(d.multipliers[i]) <= x) s += d.probs[i];
            return s;
        }
    };
    return std::visit(V{x}, spec);
}

double survival(const DistributionSpec& spec, double x) {
    struct V {
        double x;
        double operator()(const Exponential& d) const {
            return x <= 0.0 ? 1.0 : std::exp(-d.rate * x);
        }
        double operator()(const Deterministic& d) const { return x >= d.value ? 0.0 : 1.0; }
        double operator()(const Erlang& d) const {
            return x <= 0.0 ? 1.0 : erlang_survival(d.shape, d.rate * x);
        }
        double operator()(const HyperExponential& d) const {
            if (x <= 0.0) return 1.0;
            double s = 0.0;
            for (std::size_t i = 0; i < d.rates.size(); ++i)
                s += d.weights[i] * std::exp(-d.rates[i] * x);
            return s;
        }
        double operator()(const Uniform& d) const {
            if (x <= d.lo) return 1.0;
            if (x >= d.hi) return 0.0;
            return (d.hi - x) / (d.hi - d.lo);
        }
        double operator()(const LatticeDiscrete& d) const {
            double s = 0.0;
            for (std::size_t i = 0; i < d.multipliers.size(); ++i)
                if (d.span * static_cast<double>(d.multipliers[i]) > x) s += d.probs[i];
            return s;
        }
    };
    return std::visit(V{x}, spec);
}

double max_support(const DistributionSpec& spec) {
    struct V {
        double operator()(const Exponential&) const { return kInf; }
        double operator()(const Deterministic& d) const { return d.value; }
        double operator()(const Erlang&) const { return kInf; }
        double operator()(const HyperExponential&) const { return kInf; }
        double operator()(const Uniform& d) const { return d.hi; }
        double operator()(const LatticeDiscrete& d) const {
            return d.span * static_cast<double>(d.multipliers.back());
        }
    };
    return std::visit(V{}, spec);
}

bool is_point_mass(const DistributionSpec& spec) {
    if (std::holds_alternative<Deterministic>(spec)) return true;
    if (const auto* lat = std::get_if<LatticeDiscrete>(&spec))
        return lat->multipliers.size() == 1;
    return false;
}

double mean_residual_life(const DistributionSpec& spec, double x) {
    if (x < 0.0) throw DomainError("mean residual life requires x >= 0");
    struct V {
        double x;
        double operator()(const Exponential& d) const { return 1.0 / d.rate; }
        double operator()(const Deterministic& d) const {
            if (x >= d.value) throw DomainError("x is beyond the support");
            return d.value - x;
        }
        double operator()(const Erlang& d) const {
            const double sx = erlang_survival(d.shape, d.rate * x);
            if (sx <= 0.0) throw DomainError("survival underflows at x");
            auto surv = [&](double u) { return erlang_survival(d.shape, d.rate * u); };
            // The integral is divided by S(x), so the quadrature tolerance
            // scales with it to keep the mrl itself within 1e-9.
            const double tail = integrate_survival_tail(
                surv, x, static_cast<double>(d.shape) / d.rate, 0.5 * kQuadTol * sx);
            return tail / sx;
        }
        double operator()(const HyperExponential& d) const {
            // int_x^inf S = sum_i (w_i/r_i) e^{-r_i x}
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < d.rates.size(); ++i) {
                const double e = std::exp(-d.rates[i] * x);
                num += d.weights[i] / d.rates[i] * e;
                den += d.weights[i] * e;
            }
            if (den <= 0.0) throw DomainError("survival underflows at x");
            return num / den;
        }
        double operator()(const Uniform& d) const {
            if (x >= d.hi) throw DomainError("x is beyond the support");
            if (x <= d.lo) return 0.5 * (d.lo + d.hi) - x;
            return 0.5 * (d.hi - x);
        }
        double operator()(const LatticeDiscrete& d) const {
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < d.multipliers.size(); ++i) {
                const double point = d.span * static_cast<double>(d.multipliers[i]);
                if (point > x) {
                    num += d.probs[i] * (point - x);
                    den += d.probs[i];
                }
            }
            if (den <= 0.0) throw DomainError("x is beyond the support");
            return num / den;
        }
    };
    return std::visit(V{x}, spec);
}

AgingClass classify_aging(const DistributionSpec& spec) {
    struct V {
        AgingClass operator()(const Exponential&) const { return AgingClass::Both; }
        AgingClass operator()(const Deterministic&) const { return AgingClass::NBUE; }
        AgingClass operator()(const Erlang& d) const {
            return d.shape == 1 ? AgingClass::Both : AgingClass::NBUE;
        }
        AgingClass operator()(const HyperExponential& d) const {
            // All rates equal collapses to a plain exponential.
            const double r0 = d.rates.front();
            for (double r : d.rates)
                if (r != r0) return AgingClass::NWUE;
            return AgingClass::Both;
        }
        AgingClass operator()(const Uniform&) const { return AgingClass::NBUE; }
        AgingClass operator()(const LatticeDiscrete& d) const {
            return d.multipliers.size() == 1 ? AgingClass::NBUE : AgingClass::Unknown;
        }
    };
    return std::visit(V{}, spec);
}

EmpiricalMrlReport empirical_mrl_check(std::span<const double> samples,
                                       std::span<const double> grid) {
    constexpr std::size_t kMinSamples = 10000;
    constexpr std::size_t kMinExceed = 100;
    if (samples.size() < kMinSamples)
        throw EstimationError("empirical mrl check needs at least 10^4 samples");

    EmpiricalMrlReport report;
    double sum = 0.0;
    for (double s : samples) sum += s;
    const double n = static_cast<double>(samples.size());
    report.sample_mean = sum / n;
    double ss = 0.0;
    for (double s : samples) {
        const double d = s - report.sample_mean;
        ss += d * d;
    }
    report.sample_mean_se = std::sqrt(ss / (n - 1.0) / n);

    for (double x : grid) {
        MrlPoint pt;
        pt.x = x;
        double esum = 0.0;
        std::size_t count = 0;
        for (double s : samples) {
            if (s > x) {
                esum += s - x;
                ++count;
            }
        }
        pt.exceed_count = count;
        if (count < kMinExceed) {
            pt.conclusive = false;
            report.points.push_back(pt);
            continue;
        }
        pt.mrl = esum / static_cast<double>(count);
        double ess = 0.0;
        for (double s : samples) {
            if (s > x) {
                const double d = (s - x) - pt.mrl;
                ess += d * d;
            }
        }
        const double c = static_cast<double>(count);
        pt.se = std::sqrt(ess / (c - 1.0) / c);
        pt.conclusive = true;
        report.points.push_back(pt);

        const double slack =
            2.0 * std::sqrt(pt.se * pt.se + report.sample_mean_se * report.sample_mean_se);
        if (pt.mrl > report.sample_mean + slack) report.nbue_consistent = false;
        if (pt.mrl < report.sample_mean - slack) report.nwue_consistent = false;
    }
    return report;
}

}  // namespace lossq

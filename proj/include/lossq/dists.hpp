#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lossq/rng.hpp"

namespace lossq {

// Parametric families for interarrival times, service times and batch
// masses. All of them are strictly positive with finite mean.

struct Exponential {
    double rate;
};

struct Deterministic {
    double value;
};

struct Erlang {
    int shape;
    double rate;
};

struct HyperExponential {
    std::vector<double> weights;
    std::vector<double> rates;
};

struct Uniform {
    double lo;
    double hi;
};

// Support {k*span : k in multipliers}. The multipliers are kept coprime as
// a set (gcd 1), so span is the true lattice span.
struct LatticeDiscrete {
    double span;
    std::vector<int> multipliers;
    std::vector<double> probs;
};

using DistributionSpec = std::variant<Exponential, Deterministic, Erlang,
                                      HyperExponential, Uniform, LatticeDiscrete>;

// Mean-residual-life aging classes. Exponential sits on the boundary of
// both (memorylessness gives equality in both defining inequalities).
enum class AgingClass { NBUE, NWUE, Both, Unknown };

std::string to_string(AgingClass c);
std::string family_name(const DistributionSpec& spec);

// Factories validate parameters and throw ConfigError on violation.
// make_lattice folds a common multiplier factor into the span.
DistributionSpec make_exponential(double rate);
DistributionSpec make_deterministic(double value);
DistributionSpec make_erlang(int shape, double rate);
DistributionSpec make_hyperexponential(std::vector<double> weights,
                                       std::vector<double> rates);
DistributionSpec make_uniform(double lo, double hi);
DistributionSpec make_lattice(double span, std::vector<int> multipliers,
                              std::vector<double> probs);

void validate(const DistributionSpec& spec);

// One i.i.d. draw; strictly positive. Same spec and stream state give the
// same draw.
double sample(const DistributionSpec& spec, RandomStream& rng);

// Exact analytic first moment.
double mean(const DistributionSpec& spec);

double cdf(const DistributionSpec& spec, double x);
double survival(const DistributionSpec& spec, double x);

// Right endpoint of the support, +inf for unbounded families.
double max_support(const DistributionSpec& spec);

// True when the law is concentrated on a single point (Deterministic, or
// a one-atom lattice).
bool is_point_mass(const DistributionSpec& spec);

// E{xi - x | xi > x}. Closed form where available; Erlang integrates the
// survival function numerically (absolute tolerance 1e-9). Throws
// DomainError when the survival probability at x is not positive.
double mean_residual_life(const DistributionSpec& spec, double x);

// Analytic per-family classification; Unknown is an honest answer for
// lattice laws that are not a point mass.
AgingClass classify_aging(const DistributionSpec& spec);

struct MrlPoint {
    double x = 0.0;
    double mrl = 0.0;
    double se = 0.0;
    std::size_t exceed_count = 0;
    bool conclusive = false;
};

struct EmpiricalMrlReport {
    double sample_mean = 0.0;
    double sample_mean_se = 0.0;
    std::vector<MrlPoint> points;
    // Consistency over the conclusive points, with 2-standard-error slack
    // against the sample mean.
    bool nbue_consistent = true;
    bool nwue_consistent = true;
};

// Empirical mean residual life on a grid. Grid points exceeded by fewer
// than 100 samples are reported inconclusive rather than failing.
EmpiricalMrlReport empirical_mrl_check(std::span<const double> samples,
                                       std::span<const double> grid);

}  // namespace lossq

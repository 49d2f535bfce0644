#include "lossq/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "lossq/errors.hpp"

namespace lossq {

namespace {

constexpr double kPmfSumTol = 1e-12;
constexpr double kLatticeTol = 1e-9;

// Poisson(m) pmf truncated where the remaining tail drops below eps,
// renormalized over the kept terms.
struct TruncatedPoisson {
    std::vector<double> pmf;
    double tail = 0.0;
};

TruncatedPoisson poisson_pmf(double m, double eps) {
    TruncatedPoisson out;
    double term = std::exp(-m);
    double cum = term;
    out.pmf.push_back(term);
    // Keep at least the mode so the renormalization stays well conditioned.
    while (1.0 - cum > eps || static_cast<double>(out.pmf.size()) < m) {
        term *= m / static_cast<double>(out.pmf.size());
        out.pmf.push_back(term);
        cum += term;
        if (out.pmf.size() > 100000)
            throw ConfigError("Poisson truncation did not converge (lambda*b too large)");
    }
    out.tail = std::max(0.0, 1.0 - cum);
    for (double& p : out.pmf) p /= cum;
    return out;
}

}  // namespace

void validate(const LatticeModel& model) {
    if (!(model.arrival_rate > 0.0)) throw ConfigError("arrival_rate must be positive");
    if (!(model.service_time > 0.0)) throw ConfigError("service_time must be positive");
    if (!(model.span > 0.0)) throw ConfigError("span must be positive");
    if (!(model.poisson_truncation > 0.0 && model.poisson_truncation < 1.0))
        throw ConfigError("poisson_truncation must lie in (0,1)");
    if (model.batch_pmf.empty()) throw ConfigError("batch_pmf must be nonempty");
    double sum = 0.0;
    for (double p : model.batch_pmf) {
        if (p < 0.0) throw ConfigError("batch_pmf entries must be nonnegative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kPmfSumTol)
        throw ConfigError("batch_pmf must sum to 1");
}

double mean_multiplier(const LatticeModel& model) {
    double m = 0.0;
    for (std::size_t j = 0; j < model.batch_pmf.size(); ++j)
        m += model.batch_pmf[j] * static_cast<double>(j + 1);
    return m;
}

double lattice_ex1(const LatticeModel& model) { return model.span * mean_multiplier(model); }

double lattice_ad_over_b(const LatticeModel& model) {
    return model.span / (model.arrival_rate * model.service_time);
}

ServiceStep service_dp(std::size_t start_level, const LatticeModel& model) {
    validate(model);
    const std::size_t K = model.levels;
    if (start_level < 1 || start_level > K)
        throw ConfigError("start_level must lie in 1..K");

    const auto poisson =
        poisson_pmf(model.arrival_rate * model.service_time, model.poisson_truncation);
    const std::size_t J = model.batch_pmf.size();

    ServiceStep out;
    out.truncated_tail = poisson.tail;
    out.poisson_terms = poisson.pmf.size();
    out.end_level_dist.assign(K + 1, 0.0);

    // Level distribution after i of the in-service arrivals, and the
    // expected mass lost over those i arrivals. Conditioning on the Poisson
    // count mixes these per-i quantities.
    std::vector<double> level_dist(K + 1, 0.0);
    level_dist[start_level] = 1.0;
    double lost_so_far = 0.0;
    std::vector<double> after_completion(K + 1, 0.0);

    std::vector<double> next(K + 1, 0.0);
    for (std::size_t i = 0; i < poisson.pmf.size(); ++i) {
        const double pi = poisson.pmf[i];
        out.expected_lost_mass += pi * lost_so_far;
        for (std::size_t lvl = 1; lvl <= K; ++lvl)
            after_completion[lvl - 1] += pi * level_dist[lvl];

        if (i + 1 == poisson.pmf.size()) break;
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t lvl = 1; lvl <= K; ++lvl) {
            const double q = level_dist[lvl];
            if (q == 0.0) continue;
            for (std::size_t j = 1; j <= J; ++j) {
                const double p = model.batch_pmf[j - 1];
                if (p == 0.0) continue;
                if (lvl + j <= K) {
                    next[lvl + j] += q * p;
                } else {
                    next[lvl] += q * p;
                    lost_so_far += q * p * static_cast<double>(j) * model.span;
                }
            }
        }
        level_dist.swap(next);
    }
    out.end_level_dist = std::move(after_completion);
    return out;
}

OracleResult exact_expected_loss_per_cycle(const LatticeModel& model) {
    validate(model);
    const std::size_t K = model.levels;
    const std::size_t J = model.batch_pmf.size();

    OracleResult out;
    if (K == 0) {
        // Every batch is rejected at the empty system; each cycle is
        // degenerate and loses exactly the initiating mass.
        out.expected_loss_per_cycle = lattice_ex1(model);
        return out;
    }

    // v(m) = expected loss from an occupied level m until the system
    // empties; v(0) = 0. One equation per service started at level m.
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(K, K);
    Eigen::VectorXd rhs(K);
    for (std::size_t m = 1; m <= K; ++m) {
        const ServiceStep step = service_dp(m, model);
        rhs(m - 1) = step.expected_lost_mass;
        for (std::size_t mp = 1; mp <= K; ++mp)
            A(m - 1, mp - 1) -= step.end_level_dist[mp];
        out.truncated_tail = std::max(out.truncated_tail, step.truncated_tail);
        out.poisson_terms = std::max(out.poisson_terms, step.poisson_terms);
    }
    const Eigen::VectorXd v = A.partialPivLu().solve(rhs);

    double eml = 0.0;
    for (std::size_t j = 1; j <= J; ++j) {
        const double p = model.batch_pmf[j - 1];
        if (p == 0.0) continue;
        if (j <= K)
            eml += p * v(j - 1);
        else
            eml += p * static_cast<double>(j) * model.span;  // degenerate initiator
    }
    out.expected_loss_per_cycle = eml;
    return out;
}

LatticeModel lattice_model_from_queue(const QueueModel& model) {
    const auto* arr = std::get_if<Exponential>(&model.interarrival);
    if (!arr) throw ConfigError("oracle requires exponential (Poisson) interarrivals");
    const auto* svc = std::get_if<Deterministic>(&model.service_time);
    if (!svc) throw ConfigError("oracle requires a deterministic service time");

    if (!is_point_mass(model.service_batch))
        throw ConfigError("oracle requires a deterministic service batch Y = d");
    const double d = max_support(model.service_batch);

    // Arrival batch support must sit on d*{1,2,...}.
    std::vector<std::pair<int, double>> support;
    if (const auto* det = std::get_if<Deterministic>(&model.arrival_batch)) {
        support.emplace_back(0, det->value);
    } else if (const auto* lat = std::get_if<LatticeDiscrete>(&model.arrival_batch)) {
        for (std::size_t i = 0; i < lat->multipliers.size(); ++i)
            support.emplace_back(0, lat->span * static_cast<double>(lat->multipliers[i]));
    } else {
        throw ConfigError("oracle requires arrival batches on the lattice d*{1,2,...}");
    }
    std::vector<double> probs;
    if (const auto* lat = std::get_if<LatticeDiscrete>(&model.arrival_batch))
        probs = lat->probs;
    else
        probs = {1.0};

    int max_mult = 0;
    for (auto& [mult, point] : support) {
        const double ratio = point / d;
        mult = static_cast<int>(std::llround(ratio));
        if (mult < 1 || std::abs(point - static_cast<double>(mult) * d) > kLatticeTol * d)
            throw ConfigError("oracle requires arrival batches on the lattice d*{1,2,...}");
        max_mult = std::max(max_mult, mult);
    }

    const double ratio = model.capacity / d;
    if (model.policy == Policy::PartialRejection) {
        if (std::abs(ratio - std::round(ratio)) > kLatticeTol)
            throw ConfigError(
                "oracle with partial rejection requires capacity to be an integer multiple of d");
    }

    LatticeModel out;
    out.arrival_rate = arr->rate;
    out.service_time = svc->value;
    out.span = d;
    out.levels = static_cast<std::size_t>(std::floor(ratio + kLatticeTol));
    out.batch_pmf.assign(static_cast<std::size_t>(max_mult), 0.0);
    for (std::size_t i = 0; i < support.size(); ++i)
        out.batch_pmf[static_cast<std::size_t>(support[i].first) - 1] += probs[i];
    validate(out);
    return out;
}

}  // namespace lossq

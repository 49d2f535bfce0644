#pragma once

#include <cstddef>
#include <vector>

#include "lossq/engine.hpp"

namespace lossq {

// Exactly solvable instance: Poisson arrivals at rate lambda, deterministic
// service time b, service batch fixed at d, arrival batches on d*{1..J}.
// Under full rejection every mass in the system is a multiple of d, so the
// content is a level in {0..K} with K = floor(n/d) and the chain embedded
// at service completions is finite.
struct LatticeModel {
    double arrival_rate = 1.0;             // lambda
    double service_time = 1.0;             // b
    double span = 1.0;                     // d
    std::size_t levels = 1;                // K
    std::vector<double> batch_pmf;         // index j-1 = P{multiplier = j}
    double poisson_truncation = 1e-12;     // tail mass cut per service interval
};

void validate(const LatticeModel& model);

double mean_multiplier(const LatticeModel& model);
double lattice_ex1(const LatticeModel& model);       // d * mean multiplier
double lattice_ad_over_b(const LatticeModel& model); // a d / b with a = 1/lambda

// One deterministic service interval started at a given occupied level:
// expected mass lost to rejections during the service and the distribution
// of the level right after the completion removes the committed d.
struct ServiceStep {
    double expected_lost_mass = 0.0;
    std::vector<double> end_level_dist;  // size K+1
    double truncated_tail = 0.0;         // Poisson tail mass cut (before renormalizing)
    std::size_t poisson_terms = 0;
};

ServiceStep service_dp(std::size_t start_level, const LatticeModel& model);

struct OracleResult {
    double expected_loss_per_cycle = 0.0;
    double truncated_tail = 0.0;
    std::size_t poisson_terms = 0;
};

// E M_L per busy cycle, degenerate initiator rejections included: solves
// v(m) = loss(m) + sum_m' P(m->m') v(m') with v(0) = 0 over the absorbing
// level chain, then averages over the initiating batch.
OracleResult exact_expected_loss_per_cycle(const LatticeModel& model);

// Maps a QueueModel onto the lattice instance, or throws ConfigError naming
// the unmet restriction. Partial rejection is accepted only when the
// capacity is an integer multiple of d (the two policies then coincide on
// lattice inputs).
LatticeModel lattice_model_from_queue(const QueueModel& model);

}  // namespace lossq

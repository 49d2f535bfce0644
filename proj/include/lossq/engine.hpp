#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lossq/dists.hpp"

namespace lossq {

// Full rejection drops a batch that does not wholly fit; partial rejection
// clips it to the free space.
enum class Policy { FullRejection, PartialRejection };

std::string to_string(Policy p);

// Single-server batch-arrival batch-service loss queue. Capacity bounds the
// total mass in the system (waiting plus the committed in-service mass) and
// may be any positive real.
struct QueueModel {
    DistributionSpec interarrival;
    DistributionSpec service_time;
    DistributionSpec arrival_batch;
    DistributionSpec service_batch;
    double capacity = 1.0;
    Policy policy = Policy::FullRejection;
};

void validate(const QueueModel& model);

// Statistics of one busy cycle (busy period plus the trailing idle time).
// The cycle is the regenerative unit: it starts at an arrival finding the
// system empty and ends at the next such arrival.
struct CycleRecord {
    std::uint64_t n_arrivals = 0;   // arrivals in the cycle, initiator included
    std::uint64_t n_services = 0;   // service completions in the busy period
    double mass_arrived = 0.0;
    double mass_served = 0.0;
    double mass_lost = 0.0;
    double busy_length = 0.0;
    double idle_length = 0.0;
    double cycle_length = 0.0;
    double sum_interarrival = 0.0;  // the n_arrivals interarrival gaps consumed
    double sum_service = 0.0;
    bool degenerate = false;        // initiator wholly rejected
};

// The four per-cycle identities, each within relative tolerance rel_tol:
// mass conservation, cycle = busy + idle, cycle = sum of interarrivals,
// busy = sum of service times; plus the degenerate-cycle shape.
bool record_identities_ok(const CycleRecord& rec, double rel_tol = 1e-9);

struct Admission {
    double accepted = 0.0;
    double lost = 0.0;
};

// Admission of one batch against the free space. accepted + lost == batch.
Admission admit(double total_mass, double batch, double capacity, Policy policy);

inline constexpr std::uint64_t kDefaultEventGuard = 100'000'000;

// Simulates one busy cycle from a regeneration epoch. Event semantics:
// arrivals are admitted against the current total mass; a service starts
// whenever the server is free and mass is present, freezing its batch at
// min(Y, mass at start); at equal timestamps completions are processed
// before arrivals. The arrival renewal process is never paused, so the
// idle time is the residual of the in-flight interarrival interval.
//
// `trace`, when set, receives one tab-separated line per event:
// time, kind, mass before, mass after, lost mass.
//
// Throws RunawayCycleError when one cycle exceeds max_events events.
CycleRecord simulate_cycle(const QueueModel& model, RandomStream& rng,
                           std::ostream* trace = nullptr,
                           std::uint64_t max_events = kDefaultEventGuard);

// num_cycles i.i.d. cycles. Cycle k always uses random stream (seed, k),
// so the output is identical for every workers count; workers only
// partition the cycle indices.
std::vector<CycleRecord> run_cycles(const QueueModel& model, std::size_t num_cycles,
                                    std::uint64_t seed, unsigned workers = 1,
                                    std::uint64_t max_events = kDefaultEventGuard);

}  // namespace lossq

#include "lossq/engine.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <thread>

#include "lossq/errors.hpp"

namespace lossq {

namespace {

void trace_line(std::ostream* trace, double t, const char* kind, double before,
                double after, double lost) {
    if (!trace) return;
    char buf[32];
    auto put = [&](double v) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        (void)ec;
        trace->write(buf, end - buf);
    };
    put(t);
    *trace << '\t' << kind << '\t';
    put(before);
    *trace << '\t';
    put(after);
    *trace << '\t';
    put(lost);
    *trace << '\n';
}

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::string to_string(Policy p) {
    return p == Policy::FullRejection ? "full" : "partial";
}

void validate(const QueueModel& model) {
    validate(model.interarrival);
    validate(model.service_time);
    validate(model.arrival_batch);
    validate(model.service_batch);
    if (!(model.capacity > 0.0) || !std::isfinite(model.capacity))
        throw ConfigError("capacity must be a positive real");
}

bool record_identities_ok(const CycleRecord& rec, double rel_tol) {
    if (!close_rel(rec.mass_arrived, rec.mass_served + rec.mass_lost, rel_tol)) return false;
    if (!close_rel(rec.cycle_length, rec.busy_length + rec.idle_length, rel_tol)) return false;
    if (!close_rel(rec.cycle_length, rec.sum_interarrival, rel_tol)) return false;
    if (!close_rel(rec.busy_length, rec.sum_service, rel_tol)) return false;
    if (rec.degenerate) {
        if (rec.n_services != 0 || rec.mass_served != 0.0 || rec.busy_length != 0.0)
            return false;
        if (!close_rel(rec.mass_lost, rec.mass_arrived, rel_tol)) return false;
    }
    return true;
}

Admission admit(double total_mass, double batch, double capacity, Policy policy) {
    if (policy == Policy::FullRejection) {
        if (total_mass + batch <= capacity) return {batch, 0.0};
        return {0.0, batch};
    }
    const double free_space = std::max(0.0, capacity - total_mass);
    const double accepted = std::min(batch, free_space);
    return {accepted, batch - accepted};
}

CycleRecord simulate_cycle(const QueueModel& model, RandomStream& rng,
                           std::ostream* trace, std::uint64_t max_events) {
    CycleRecord rec;
    double clock = 0.0;
    double total = 0.0;      // waiting mass + remaining committed in-service mass
    double committed = 0.0;  // batch frozen at the start of the running service
    bool busy = false;
    double completion = std::numeric_limits<double>::infinity();
    std::uint64_t events = 0;

    auto count_event = [&] {
        if (++events > max_events) throw RunawayCycleError(max_events);
    };

    auto arrive = [&] {
        const double batch = sample(model.arrival_batch, rng);
        const auto adm = admit(total, batch, model.capacity, model.policy);
        const double before = total;
        total = std::min(total + adm.accepted, model.capacity);
        rec.n_arrivals += 1;
        rec.mass_arrived += batch;
        rec.mass_lost += adm.lost;
        trace_line(trace, clock, "arrival", before, total, adm.lost);
        const double gap = sample(model.interarrival, rng);
        rec.sum_interarrival += gap;
        return gap;
    };

    auto start_service = [&] {
        const double duration = sample(model.service_time, rng);
        const double batch = sample(model.service_batch, rng);
        committed = std::min(batch, total);
        completion = clock + duration;
        rec.sum_service += duration;
        busy = true;
        trace_line(trace, clock, "service_start", total, total, 0.0);
    };

    // Regeneration epoch: the initiating arrival finds the system empty.
    count_event();
    double next_arrival = arrive();

    if (total <= 0.0) {
        // Initiator wholly rejected: a degenerate cycle closes at the next
        // arrival, which again finds the system empty.
        rec.degenerate = true;
        rec.idle_length = next_arrival;
        rec.cycle_length = next_arrival;
        trace_line(trace, next_arrival, "cycle_end", 0.0, 0.0, 0.0);
        assert(record_identities_ok(rec));
        return rec;
    }
    start_service();

    while (true) {
        count_event();
        assert(total <= model.capacity);
        assert(busy && committed > 0.0);
        if (completion <= next_arrival) {
            // Tie rule: a completion at the same instant as an arrival is
            // processed first, so a busy period can end exactly when the
            // next cycle starts.
            clock = completion;
            const double before = total;
            total -= committed;
            rec.n_services += 1;
            rec.mass_served += committed;
            committed = 0.0;
            busy = false;
            completion = std::numeric_limits<double>::infinity();
            trace_line(trace, clock, "completion", before, total, 0.0);
            if (total > 0.0) {
                start_service();
            } else {
                // clock and sum_service accumulate the same additions in the
                // same order, so busy_length == sum_service bitwise; likewise
                // cycle_length == sum_interarrival.
                rec.busy_length = clock;
                rec.idle_length = next_arrival - clock;
                rec.cycle_length = next_arrival;
                trace_line(trace, next_arrival, "cycle_end", 0.0, 0.0, 0.0);
                break;
            }
        } else {
            clock = next_arrival;
            next_arrival += arrive();
        }
    }
    assert(record_identities_ok(rec));
    return rec;
}

std::vector<CycleRecord> run_cycles(const QueueModel& model, std::size_t num_cycles,
                                    std::uint64_t seed, unsigned workers,
                                    std::uint64_t max_events) {
    if (num_cycles < 1) throw ConfigError("num_cycles must be at least 1");
    validate(model);

    std::vector<CycleRecord> records(num_cycles);
    // Each worker owns a contiguous block of stream indices and stops at its
    // first runaway cycle. The lowest failing index over all blocks is the
    // globally lowest one, so the reported stream does not depend on the
    // worker count.
    auto run_block = [&](std::size_t begin, std::size_t end) -> std::optional<std::uint64_t> {
        for (std::size_t k = begin; k < end; ++k) {
            RandomStream rng(seed, k);
            try {
                records[k] = simulate_cycle(model, rng, nullptr, max_events);
            } catch (const RunawayCycleError&) {
                return k;
            }
        }
        return std::nullopt;
    };

    const unsigned n_workers = static_cast<unsigned>(
        std::min<std::size_t>(std::max(1u, workers), num_cycles));
    if (n_workers == 1) {
        if (auto bad = run_block(0, num_cycles))
            throw RunawayCycleError(max_events, *bad);
        return records;
    }

    std::vector<std::optional<std::uint64_t>> failed(n_workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (num_cycles + n_workers - 1) / n_workers;
    for (unsigned w = 0; w < n_workers; ++w) {
        const std::size_t begin = std::min<std::size_t>(w * chunk, num_cycles);
        const std::size_t end = std::min(begin + chunk, num_cycles);
        pool.emplace_back([&, w, begin, end] { failed[w] = run_block(begin, end); });
    }
    for (auto& t : pool) t.join();

    std::optional<std::uint64_t> lowest;
    for (const auto& f : failed)
        if (f && (!lowest || *f < *lowest)) lowest = *f;
    if (lowest) throw RunawayCycleError(max_events, *lowest);
    return records;
}

}  // namespace lossq

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace pathosim::engine {

/// Virtual time in integer microseconds.
struct SimTime {
    std::uint64_t ticks = 0;

    static constexpr std::uint64_t kTicksPerSecond = 1'000'000;

    static constexpr SimTime from_ticks(std::uint64_t t) { return SimTime{t}; }
    /// Nearest tick; exact for multiples of 1 us.
    static SimTime from_seconds(double s) {
        if (!(s >= 0.0)) {
            throw std::domain_error("SimTime: negative or NaN seconds");
        }
        return SimTime{static_cast<std::uint64_t>(std::llround(s * kTicksPerSecond))};
    }
    constexpr double seconds() const { return static_cast<double>(ticks) / kTicksPerSecond; }
    constexpr double hours() const { return seconds() / 3600.0; }

    friend constexpr auto operator<=>(SimTime, SimTime) = default;
    friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ticks + b.ticks}; }
    friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime{a.ticks - b.ticks}; }
};

inline SimTime seconds(double s) { return SimTime::from_seconds(s); }

class SchedulingInPast : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct EventHandle {
    std::uint64_t seq = 0;
    friend constexpr bool operator==(EventHandle, EventHandle) = default;
};

template <typename Payload>
struct Event {
    SimTime at;
    std::uint64_t seq = 0;
    Payload payload;
};

/// Pending events ordered by (at, seq); seq is the insertion counter, so
/// simultaneous events run in the order they were scheduled.
template <typename Payload>
class EventQueue {
public:
    SimTime now() const { return now_; }
    std::size_t size() const { return pending_.size(); }
    bool empty() const { return pending_.empty(); }

    EventHandle schedule(SimTime at, Payload payload) {
        if (at < now_) {
            throw SchedulingInPast("event scheduled at " + std::to_string(at.ticks) + " before clock " +
                                   std::to_string(now_.ticks));
        }
        const std::uint64_t seq = next_seq_++;
        heap_.push(Event<Payload>{at, seq, std::move(payload)});
        pending_.insert(seq);
        return EventHandle{seq};
    }

    /// Returns false if the event already ran or was already cancelled.
    bool cancel(EventHandle handle) {
        if (pending_.erase(handle.seq) == 0) {
            return false;
        }
        cancelled_.insert(handle.seq);
        return true;
    }

    bool is_pending(EventHandle handle) const { return pending_.contains(handle.seq); }

    std::optional<SimTime> next_time() {
        drop_cancelled();
        if (heap_.empty()) {
            return std::nullopt;
        }
        return heap_.top().at;
    }

    /// Removes the earliest live event and advances the clock to it.
    std::optional<Event<Payload>> pop() {
        drop_cancelled();
        if (heap_.empty()) {
            return std::nullopt;
        }
        Event<Payload> ev = heap_.top();
        heap_.pop();
        pending_.erase(ev.seq);
        now_ = ev.at;
        return ev;
    }

    void advance_to(SimTime t) {
        if (t < now_) {
            throw SchedulingInPast("clock cannot move backwards");
        }
        now_ = t;
    }

private:
    struct Later {
        bool operator()(const Event<Payload>& a, const Event<Payload>& b) const {
            if (a.at != b.at) {
                return a.at > b.at;
            }
            return a.seq > b.seq;
        }
    };

    void drop_cancelled() {
        while (!heap_.empty() && cancelled_.erase(heap_.top().seq) > 0) {
            heap_.pop();
        }
    }

    std::priority_queue<Event<Payload>, std::vector<Event<Payload>>, Later> heap_;
    std::unordered_set<std::uint64_t> pending_;
    std::unordered_set<std::uint64_t> cancelled_;
    std::uint64_t next_seq_ = 0;
    SimTime now_;
};

/// std::mt19937_64 (sequence fixed by the C++ standard) with uniforms from the
/// top 53 bits and normals from the Box-Muller transform, pairs cached.
/// std::normal_distribution is avoided because its algorithm is
/// implementation-defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return gen_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double normal(double mean, double sigma) {
        if (sigma == 0.0) {
            return mean;
        }
        return mean + sigma * standard_normal();
    }

    double standard_normal() {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return z;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        return r * std::cos(theta);
    }

    /// Independent stream for a named purpose, derived from this stream's seed.
    RngStream derive(std::uint64_t salt) const { return RngStream(mix(seed_ ^ mix(salt))); }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 gen_;
    std::optional<double> spare_;
};

}  // namespace pathosim::engine

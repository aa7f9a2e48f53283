#include "pathosim/power.hpp"

#include <algorithm>
#include <cmath>

namespace pathosim::power {

namespace {

constexpr double kTicksPerHour = 3600.0 * SimTime::kTicksPerSecond;

}  // namespace

std::string_view to_string(PowerState state) {
    switch (state) {
    case PowerState::Sleeping: return "Sleeping";
    case PowerState::AwakeIdle: return "AwakeIdle";
    case PowerState::Transmitting: return "Transmitting";
    case PowerState::Dead: return "Dead";
    }
    return "?";
}

double current_ma(const ConsumptionProfile& profile, PowerState state) {
    switch (state) {
    case PowerState::Sleeping: return profile.sleeping_ma;
    case PowerState::AwakeIdle: return profile.awake_idle_ma;
    case PowerState::Transmitting: return profile.transmitting_ma;
    case PowerState::Dead: return 0.0;
    }
    return 0.0;
}

CyclicSleep cyclic_sleep_n(double t_external_s, double t_poll_s) {
    if (!(t_external_s > 0.0) || !(t_poll_s > 0.0)) {
        throw NonPositivePeriod("cyclic sleep periods must be > 0");
    }
    const double ratio = std::floor(t_external_s / t_poll_s + 0.5);
    const auto n = static_cast<std::uint32_t>(std::max(1.0, ratio));
    return CyclicSleep{n, n * t_poll_s};
}

CyclicSleepConfig make_cyclic_sleep(double t_external_s, double t_poll_s) {
    const CyclicSleep cs = cyclic_sleep_n(t_external_s, t_poll_s);
    return CyclicSleepConfig{t_external_s, t_poll_s, cs.n};
}

WakeTimeline wake_timeline(const CyclicSleepConfig& cfg, double horizon_s) {
    if (!(horizon_s > 0.0) || !(cfg.t_poll_s > 0.0) || cfg.n == 0) {
        throw NonPositivePeriod("wake_timeline: horizon, poll period and n must be > 0");
    }
    const SimTime poll = SimTime::from_seconds(cfg.t_poll_s);
    const SimTime horizon = SimTime::from_seconds(horizon_s);
    WakeTimeline out;
    std::uint64_t k = 1;
    for (SimTime t{poll.ticks}; t <= horizon; t = SimTime{poll.ticks * ++k}) {
        out.poll_wakes.push_back(t);
        if (k % cfg.n == 0) {
            out.external_wakes.push_back(t);
        }
    }
    return out;
}

void accrue(PowerLedger& ledger, BatteryState* battery, const ConsumptionProfile& profile, PowerState new_state,
            SimTime now) {
    const SimTime until = std::max(now, ledger.entered_at);
    std::uint64_t span = until.ticks - ledger.entered_at.ticks;
    const double draw = current_ma(profile, ledger.state);

    if (span > 0 && !ledger.dead()) {
        double charge = draw * static_cast<double>(span) / kTicksPerHour;
        if (battery && charge >= battery->remaining_mah) {
            // Depletes inside this interval.
            const auto to_death = std::min<std::uint64_t>(
                span, draw > 0.0 ? static_cast<std::uint64_t>(std::llround(battery->remaining_mah * kTicksPerHour / draw))
                                 : span);
            ledger.ticks_in[static_cast<std::size_t>(ledger.state)] += to_death;
            ledger.consumed_mah += battery->remaining_mah;
            battery->remaining_mah = 0.0;
            ledger.state = PowerState::Dead;
            ledger.entered_at = SimTime{ledger.entered_at.ticks + to_death};
            ledger.died_at = ledger.entered_at;
            span -= to_death;
        } else {
            ledger.ticks_in[static_cast<std::size_t>(ledger.state)] += span;
            ledger.consumed_mah += charge;
            if (battery) {
                battery->remaining_mah -= charge;
            }
            ledger.entered_at = until;
            span = 0;
        }
    }
    if (ledger.dead()) {
        ledger.ticks_in[static_cast<std::size_t>(PowerState::Dead)] += until.ticks - ledger.entered_at.ticks;
        ledger.entered_at = until;
        return;
    }
    ledger.entered_at = until;
    ledger.state = new_state;
}

double ledger_energy_mah(const PowerLedger& ledger, const ConsumptionProfile& profile) {
    double total = 0.0;
    for (std::size_t i = 0; i < kPowerStateCount; ++i) {
        total += current_ma(profile, static_cast<PowerState>(i)) * static_cast<double>(ledger.ticks_in[i]) / kTicksPerHour;
    }
    return total;
}

double average_current(const ConsumptionProfile& profile, double cycle_s, double active_s, PowerState active_state) {
    if (!(cycle_s > 0.0)) {
        throw NonPositivePeriod("average_current: cycle must be > 0");
    }
    if (!(active_s >= 0.0) || active_s > cycle_s) {
        throw ActiveExceedsCycle("average_current: need 0 <= active <= cycle");
    }
    return (current_ma(profile, active_state) * active_s + profile.sleeping_ma * (cycle_s - active_s)) / cycle_s;
}

double estimate_lifetime(double capacity_mah, double avg_ma) {
    if (!(avg_ma > 0.0)) {
        throw NonPositiveCurrent("estimate_lifetime: average current must be > 0");
    }
    return capacity_mah / avg_ma;
}

}  // namespace pathosim::power

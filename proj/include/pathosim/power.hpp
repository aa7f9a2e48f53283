#pragma once

#include "pathosim/engine.hpp"
#include "pathosim/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace pathosim::power {

using engine::SimTime;
using model::BatteryState;
using model::ConsumptionProfile;

class NonPositivePeriod : public std::domain_error {
public:
    using std::domain_error::domain_error;
};
class ActiveExceedsCycle : public std::domain_error {
public:
    using std::domain_error::domain_error;
};
class NonPositiveCurrent : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class PowerState : std::uint8_t { Sleeping, AwakeIdle, Transmitting, Dead };
inline constexpr std::size_t kPowerStateCount = 4;

std::string_view to_string(PowerState state);
double current_ma(const ConsumptionProfile& profile, PowerState state);

/// The radio polls its parent every t_poll seconds; the external circuitry is
/// woken on every n-th poll, so the requested period is quantized to n * t_poll.
struct CyclicSleepConfig {
    double t_external_s = 0.0;
    double t_poll_s = 0.0;
    std::uint32_t n = 1;

    double effective_period_s() const { return n * t_poll_s; }
};

struct CyclicSleep {
    std::uint32_t n;
    double effective_period_s;
};

/// n = max(1, round-half-up(t_external / t_poll)).
CyclicSleep cyclic_sleep_n(double t_external_s, double t_poll_s);
CyclicSleepConfig make_cyclic_sleep(double t_external_s, double t_poll_s);

struct WakeTimeline {
    std::vector<SimTime> poll_wakes;
    std::vector<SimTime> external_wakes;
};

/// Wakes in (0, horizon]: polls at k * t_poll, external wakes at k * n * t_poll.
WakeTimeline wake_timeline(const CyclicSleepConfig& cfg, double horizon_s);

/// Piecewise-constant current integration for one node. `entered_at` may run
/// ahead of the engine clock while a booked transmission is still on air.
struct PowerLedger {
    PowerState state = PowerState::Sleeping;
    SimTime entered_at;
    double consumed_mah = 0.0;
    std::array<std::uint64_t, kPowerStateCount> ticks_in{};
    std::optional<SimTime> died_at;

    std::uint64_t ticks(PowerState s) const { return ticks_in[static_cast<std::size_t>(s)]; }
    double seconds_in(PowerState s) const { return static_cast<double>(ticks(s)) / SimTime::kTicksPerSecond; }
    bool dead() const { return state == PowerState::Dead; }

    friend bool operator==(const PowerLedger&, const PowerLedger&) = default;
};

/// Charges the interval since `entered_at` at the current state's draw, then
/// switches to `new_state`. If `now` is earlier than `entered_at` the switch
/// happens at `entered_at`. A battery reaching 0 ends in Dead at the exact
/// depletion tick; Dead is absorbing. `battery` is null for mains power.
void accrue(PowerLedger& ledger, BatteryState* battery, const ConsumptionProfile& profile, PowerState new_state,
            SimTime now);

/// Sum over states of duration x current, in mAh. Equals consumed_mah up to
/// one tick of quantization at depletion.
double ledger_energy_mah(const PowerLedger& ledger, const ConsumptionProfile& profile);

double average_current(const ConsumptionProfile& profile, double cycle_s, double active_s, PowerState active_state);

double estimate_lifetime(double capacity_mah, double avg_ma);

}  // namespace pathosim::power

#include "pathosim/sensors.hpp"

#include <cmath>
#include <numbers>
#include <type_traits>

namespace pathosim::sensors {

std::string_view unit(model::SensorKind kind) {
    switch (kind) {
    case model::SensorKind::StrainGauge: return "microstrain";
    case model::SensorKind::Displacement: return "mm";
    case model::SensorKind::TemperatureCatheter: return "degC";
    }
    return "";
}

void GaugeState::start_heating(SimTime now, double heat_duration_s) {
    const SimTime duration = SimTime::from_seconds(heat_duration_s);
    heated_from = now + duration;
    heated_until = now + duration + duration;
}

bool GaugeState::is_heated(SimTime now) const {
    return heated_from && heated_until && *heated_from <= now && now <= *heated_until;
}

double ground_truth(const SensorSpec& spec, SimTime t) {
    const double hours = t.hours();
    return std::visit(
        [hours](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, model::ConstantSignal>) {
                return s.level;
            } else if constexpr (std::is_same_v<T, model::RampSignal>) {
                return s.start + s.slope_per_hour * hours;
            } else {
                return s.mean + s.amplitude * std::sin(2.0 * std::numbers::pi * hours / s.period_hours);
            }
        },
        spec.signal);
}

std::optional<double> sample(const SensorSpec& spec, const GaugeState& gauge, SimTime t, engine::RngStream& rng) {
    if (requires_heating(spec) && !gauge.is_heated(t)) {
        return std::nullopt;
    }
    return rng.normal(ground_truth(spec, t), spec.noise_sigma);
}

}  // namespace pathosim::sensors

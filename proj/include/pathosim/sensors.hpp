#pragma once

#include "pathosim/engine.hpp"
#include "pathosim/model.hpp"

#include <optional>
#include <string_view>

namespace pathosim::sensors {

using engine::SimTime;
using model::SensorSpec;

/// Engineering unit of a sensor kind's readings.
std::string_view unit(model::SensorKind kind);

/// Validity window of a heated strain gauge. Heating started at `t` makes the
/// gauge usable from t + heat_duration until t + 2 * heat_duration.
struct GaugeState {
    std::optional<SimTime> heated_from;
    std::optional<SimTime> heated_until;

    void start_heating(SimTime now, double heat_duration_s);
    bool is_heated(SimTime now) const;

    friend bool operator==(const GaugeState&, const GaugeState&) = default;
};

inline bool requires_heating(const SensorSpec& spec) { return spec.kind == model::SensorKind::StrainGauge; }

double ground_truth(const SensorSpec& spec, SimTime t);

/// Noisy reading, or nullopt (GaugeNotHeated) when a strain gauge is read
/// outside its heated window.
std::optional<double> sample(const SensorSpec& spec, const GaugeState& gauge, SimTime t, engine::RngStream& rng);

}  // namespace pathosim::sensors

#pragma once

// Homeostatic mood model.
//
// The robot keeps a single scalar mood M in [1,100]. Without stimulation the
// mood decays once per tick interval by delta * interval_ms, where the decay
// rate delta itself creeps upward by a fixed increment every tick (capped).
// A positive interaction adds impact * 50 to the mood; the impact accrues
// linearly with the seconds elapsed since the previous interaction and
// plateaus after an hour. Spending an interaction damps both the decay rate
// and the impact, so bursts of interactions are worth less than spread-out
// ones.
//
// Everything here is a pure function of (state, params, timestamp). Nothing
// reads a clock.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace affecta {

using TimestampMs = std::int64_t;

/// Thrown when an operation is given a timestamp earlier than a state anchor.
class TimeRegressionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EngineParams {
    double mood_init = 50.0;
    double decay_init = 1e-5;  // mood units per ms
    double impact_init = 0.0;

    std::int64_t tick_interval_ms = 1000;
    double decay_increment = 1e-7;
    double decay_cap = 1e-4;

    double impact_growth_per_s = 0.75;
    double impact_plateau_s = 3600.0;
    double impact_plateau_bonus = 2700.0;

    double mood_gain_factor = 50.0;
    double decay_damp_factor = 0.0005;
    double impact_damp_factor = 0.75;

    double mood_min = 1.0;
    double mood_max = 100.0;

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const;

    bool operator==(const EngineParams&) const = default;
};

/// Sets a single field by name (the names used in the session-log header and
/// `--params` overrides). Unknown names throw std::invalid_argument.
void set_param(EngineParams& params, const std::string& key, double value);

struct MoodState {
    double mood = 0.0;
    double decay_rate = 0.0;
    double impact = 0.0;  // I(t0): impact remaining after the last interaction
    TimestampMs last_interaction_ms = 0;
    TimestampMs last_decay_tick_ms = 0;

    bool operator==(const MoodState&) const = default;
};

/// Smallest decay rate the model will hold. Repeated damping without an
/// intervening tick would otherwise underflow to zero after ~90 interactions.
inline constexpr double kDecayFloor = 2.2250738585072014e-308;

MoodState new_state(const EngineParams& params, TimestampMs now_ms);

/// Applies every whole tick interval elapsed since the last decay anchor.
MoodState tick(const MoodState& state, const EngineParams& params, TimestampMs now_ms);

/// Impact available at `now_ms`; does not modify the state.
double impact_at(const MoodState& state, const EngineParams& params, TimestampMs now_ms);

struct InteractionResult {
    MoodState state;
    double mood_before = 0.0;       // after due ticks, before the gain
    double impact_spent = 0.0;      // g = impact_at(now)
    double unclamped_gain = 0.0;    // g * mood_gain_factor

    double applied_gain() const { return state.mood - mood_before; }
};

/// Full interaction update with the intermediate quantities exposed.
InteractionResult interact(const MoodState& state, const EngineParams& params, TimestampMs now_ms);

MoodState on_interaction(const MoodState& state, const EngineParams& params, TimestampMs now_ms);

/// FNV-1a over the bit patterns of every field; stable for identical states.
std::uint64_t state_digest(const MoodState& state);

}  // namespace affecta

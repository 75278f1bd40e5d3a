#include "affecta/affect.hpp"

#include "affecta/digest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace affecta {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("engine parameter must be positive and finite: ") + name);
    }
}

void check_not_before(TimestampMs now_ms, TimestampMs anchor, const char* what) {
    if (now_ms < anchor) {
        throw TimeRegressionError("timestamp " + std::to_string(now_ms) + " precedes " + what + " " +
                                  std::to_string(anchor));
    }
}

}  // namespace

void EngineParams::validate() const {
    require_positive(decay_init, "decay_init");
    require_positive(decay_increment, "decay_increment");
    require_positive(decay_cap, "decay_cap");
    require_positive(impact_growth_per_s, "impact_growth_per_s");
    require_positive(impact_plateau_s, "impact_plateau_s");
    require_positive(impact_plateau_bonus, "impact_plateau_bonus");
    require_positive(mood_gain_factor, "mood_gain_factor");
    require_positive(decay_damp_factor, "decay_damp_factor");
    require_positive(impact_damp_factor, "impact_damp_factor");
    require_positive(mood_min, "mood_min");
    require_positive(mood_max, "mood_max");
    if (tick_interval_ms <= 0) {
        throw std::invalid_argument("engine parameter must be positive: tick_interval_ms");
    }
    if (!(mood_min < mood_max)) {
        throw std::invalid_argument("mood_min must be below mood_max");
    }
    if (!(mood_init >= mood_min && mood_init <= mood_max)) {
        throw std::invalid_argument("mood_init outside [mood_min, mood_max]");
    }
    if (decay_init > decay_cap) {
        throw std::invalid_argument("decay_init exceeds decay_cap");
    }
    if (!(impact_init >= 0.0) || !std::isfinite(impact_init)) {
        throw std::invalid_argument("impact_init must be non-negative");
    }
}

void set_param(EngineParams& p, const std::string& key, double value) {
    if (key == "mood_init") p.mood_init = value;
    else if (key == "decay_init") p.decay_init = value;
    else if (key == "impact_init") p.impact_init = value;
    else if (key == "tick_interval_ms") {
        if (value != std::floor(value)) throw std::invalid_argument("tick_interval_ms must be an integer");
        p.tick_interval_ms = static_cast<std::int64_t>(value);
    }
    else if (key == "decay_increment") p.decay_increment = value;
    else if (key == "decay_cap") p.decay_cap = value;
    else if (key == "impact_growth_per_s") p.impact_growth_per_s = value;
    else if (key == "impact_plateau_s") p.impact_plateau_s = value;
    else if (key == "impact_plateau_bonus") p.impact_plateau_bonus = value;
    else if (key == "mood_gain_factor") p.mood_gain_factor = value;
    else if (key == "decay_damp_factor") p.decay_damp_factor = value;
    else if (key == "impact_damp_factor") p.impact_damp_factor = value;
    else if (key == "mood_min") p.mood_min = value;
    else if (key == "mood_max") p.mood_max = value;
    else throw std::invalid_argument("unknown engine parameter: " + key);
}

MoodState new_state(const EngineParams& params, TimestampMs now_ms) {
    params.validate();
    return MoodState{
        .mood = params.mood_init,
        .decay_rate = params.decay_init,
        .impact = params.impact_init,
        .last_interaction_ms = now_ms,
        .last_decay_tick_ms = now_ms,
    };
}

MoodState tick(const MoodState& state, const EngineParams& params, TimestampMs now_ms) {
    check_not_before(now_ms, state.last_decay_tick_ms, "last decay tick");

    const std::int64_t steps = (now_ms - state.last_decay_tick_ms) / params.tick_interval_ms;
    const double dt = static_cast<double>(params.tick_interval_ms);

    MoodState next = state;
    for (std::int64_t k = 0; k < steps; ++k) {
        next.decay_rate = std::min(next.decay_rate + params.decay_increment, params.decay_cap);
        next.mood = std::max(params.mood_min, next.mood - next.decay_rate * dt);
        // Fixed point: every remaining step would reproduce this state exactly.
        if (next.mood == params.mood_min && next.decay_rate == params.decay_cap) {
            break;
        }
    }
    next.last_decay_tick_ms = state.last_decay_tick_ms + steps * params.tick_interval_ms;
    return next;
}

double impact_at(const MoodState& state, const EngineParams& params, TimestampMs now_ms) {
    check_not_before(now_ms, state.last_interaction_ms, "last interaction");
    const double tau_s = static_cast<double>(now_ms - state.last_interaction_ms) / 1000.0;
    if (tau_s < params.impact_plateau_s) {
        return state.impact + params.impact_growth_per_s * tau_s;
    }
    return state.impact + params.impact_plateau_bonus;
}

InteractionResult interact(const MoodState& state, const EngineParams& params, TimestampMs now_ms) {
    check_not_before(now_ms, state.last_interaction_ms, "last interaction");

    InteractionResult r;
    r.state = tick(state, params, now_ms);
    r.mood_before = r.state.mood;
    r.impact_spent = impact_at(r.state, params, now_ms);
    r.unclamped_gain = r.impact_spent * params.mood_gain_factor;

    r.state.mood = std::min(params.mood_max, r.state.mood + r.unclamped_gain);
    r.state.decay_rate = std::max(kDecayFloor, r.state.decay_rate * params.decay_damp_factor);
    r.state.impact = std::max(0.0, r.impact_spent * params.impact_damp_factor);
    r.state.last_interaction_ms = now_ms;
    return r;
}

MoodState on_interaction(const MoodState& state, const EngineParams& params, TimestampMs now_ms) {
    return interact(state, params, now_ms).state;
}

std::uint64_t state_digest(const MoodState& state) {
    Fnv1a h;
    h.add(state.mood);
    h.add(state.decay_rate);
    h.add(state.impact);
    h.add(state.last_interaction_ms);
    h.add(state.last_decay_tick_ms);
    return h.value();
}

}  // namespace affecta

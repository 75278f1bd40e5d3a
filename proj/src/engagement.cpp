#include "affecta/engagement.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace affecta {

namespace {

FeedbackEvent face_event(const EngineParams& params, double mood, TimestampMs now_ms) {
    const ExpressionConfig expr{.mood_min = params.mood_min, .mood_max = params.mood_max};
    return FeedbackEvent{now_ms, FaceUpdate{mood, face_for_mood(mood, expr)}};
}

}  // namespace

std::string_view to_string(Condition condition) {
    return condition == Condition::Emotions ? "emotions" : "points";
}

Condition parse_condition(std::string_view text) {
    if (text == "emotions") return Condition::Emotions;
    if (text == "points") return Condition::Points;
    throw std::invalid_argument("unknown condition '" + std::string(text) + "' (expected emotions|points)");
}

void StrategyConfig::validate(const EngineParams& params) const {
    if (points_per_completion <= 0) {
        throw std::invalid_argument("points_per_completion must be positive");
    }
    if (kind == Condition::Points && pinned_mood != params.mood_max) {
        throw std::invalid_argument("points strategy pins the mood at mood_max");
    }
    if (!(face_update_delta >= 0.0)) {
        throw std::invalid_argument("face_update_delta must be non-negative");
    }
}

SessionStart start_session(const StrategyConfig& strategy, const EngineParams& params, TimestampMs now_ms) {
    strategy.validate(params);
    EngagementState s;
    s.mood = new_state(params, now_ms);
    if (strategy.kind == Condition::Points) {
        s.mood.mood = strategy.pinned_mood;
    }
    s.last_rendered_mood = s.mood.mood;
    return SessionStart{s, face_event(params, s.mood.mood, now_ms)};
}

ScoredOutcome on_game_scored(const StrategyConfig& strategy, const EngineParams& params,
                             const GameAttempt& attempt, const EngagementState& state, TimestampMs now_ms) {
    ScoredOutcome out{state, {}, false};

    if (strategy.kind == Condition::Points) {
        // Completion pays regardless of accuracy.
        out.state.ledger.total_points += strategy.points_per_completion;
        out.state.ledger.award_count += 1;
        out.event = FeedbackEvent{now_ms, CoinAward{strategy.points_per_completion, true}};
        return out;
    }

    if (attempt.accuracy >= strategy.positive_accuracy_threshold - 1e-12) {
        out.state.mood = on_interaction(state.mood, params, now_ms);
        out.positive_interaction = true;
    } else {
        out.state.mood = tick(state.mood, params, now_ms);
    }
    out.state.last_rendered_mood = out.state.mood.mood;
    out.event = face_event(params, out.state.mood.mood, now_ms);
    return out;
}

HeartbeatOutcome idle_heartbeat(const StrategyConfig& strategy, const EngineParams& params,
                                const EngagementState& state, TimestampMs now_ms) {
    HeartbeatOutcome out{state, std::nullopt};
    if (strategy.kind == Condition::Points) {
        return out;
    }
    out.state.mood = tick(state.mood, params, now_ms);
    const double mood = out.state.mood.mood;
    if (std::abs(mood - state.last_rendered_mood) >= strategy.face_update_delta && mood != state.last_rendered_mood) {
        out.state.last_rendered_mood = mood;
        out.event = face_event(params, mood, now_ms);
    }
    return out;
}

}  // namespace affecta

#pragma once

// Feedback strategies. Under Emotions a completed game feeds the mood model
// and the face tracks the mood; under Points every completion pays a fixed
// award with a coin animation while the mood stays pinned at its maximum.

#include "affecta/affect.hpp"
#include "affecta/expression.hpp"
#include "affecta/game.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

namespace affecta {

enum class Condition { Emotions, Points };

std::string_view to_string(Condition condition);
/// Accepts "emotions" / "points"; throws std::invalid_argument otherwise.
Condition parse_condition(std::string_view text);

struct StrategyConfig {
    Condition kind = Condition::Emotions;
    std::int64_t points_per_completion = 1000;
    double pinned_mood = 100.0;
    double positive_accuracy_threshold = 1.0 / 3.0;  // Emotions only
    double face_update_delta = 0.5;                  // mood units

    void validate(const EngineParams& params) const;
};

struct FaceUpdate {
    double mood = 0.0;
    FaceDescriptor face;

    bool operator==(const FaceUpdate&) const = default;
};

struct CoinAward {
    std::int64_t points = 0;
    bool spin_animation = true;

    bool operator==(const CoinAward&) const = default;
};

struct FeedbackEvent {
    TimestampMs timestamp_ms = 0;
    std::variant<FaceUpdate, CoinAward> payload;

    bool operator==(const FeedbackEvent&) const = default;
};

struct PointsLedger {
    std::int64_t total_points = 0;
    std::int64_t award_count = 0;

    bool operator==(const PointsLedger&) const = default;
};

/// Everything one session's strategy carries between events.
struct EngagementState {
    MoodState mood;
    PointsLedger ledger;
    double last_rendered_mood = 0.0;  // mood of the most recent FaceUpdate
};

/// Initial state plus the FaceUpdate shown when the session starts.
struct SessionStart {
    EngagementState state;
    FeedbackEvent initial_face;
};

SessionStart start_session(const StrategyConfig& strategy, const EngineParams& params, TimestampMs now_ms);

struct ScoredOutcome {
    EngagementState state;
    FeedbackEvent event;
    bool positive_interaction = false;  // Emotions: mood model was stimulated
};

ScoredOutcome on_game_scored(const StrategyConfig& strategy, const EngineParams& params,
                             const GameAttempt& attempt, const EngagementState& state, TimestampMs now_ms);

struct HeartbeatOutcome {
    EngagementState state;
    std::optional<FeedbackEvent> event;
};

/// Emotions: applies due decay ticks and re-renders the face once the mood
/// has drifted at least face_update_delta from the last rendered value.
/// Points: no-op.
HeartbeatOutcome idle_heartbeat(const StrategyConfig& strategy, const EngineParams& params,
                                const EngagementState& state, TimestampMs now_ms);

}  // namespace affecta

#pragma once

// Silent rhythm-matching game: the robot vibrates a three-note pattern when
// grasped and the user reproduces it with timed squeezes.

#include "affecta/affect.hpp"
#include "affecta/random.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace affecta {

inline constexpr std::size_t kNotesPerPattern = 3;
inline constexpr std::int64_t kDefaultToleranceMs = 150;

// ---------------------------------------------------------------------------
// Touch sensing

enum class Sensor : std::size_t { SideLeft = 0, SideRight, Front, BackLeft, BackRight };
inline constexpr std::size_t kSensorCount = 5;

struct TouchFrame {
    std::array<bool, kSensorCount> channels{};

    bool operator[](Sensor s) const { return channels[static_cast<std::size_t>(s)]; }
    bool& operator[](Sensor s) { return channels[static_cast<std::size_t>(s)]; }
    int active_count() const;

    /// "10100" style string, channel order as in Sensor.
    std::string bits() const;
    static TouchFrame from_bits(std::string_view bits);

    bool operator==(const TouchFrame&) const = default;
};

/// A grasp is at least two active sensors, at least one of them on a side.
bool grasp_detected(const TouchFrame& frame);

enum class GestureKind { Grasp, Release, Squeeze };

/// Turns a stream of raw frames into grasp/release/squeeze gestures. While
/// grasped, any sensor switching on counts as a squeeze.
class TouchTracker {
public:
    std::optional<GestureKind> update(const TouchFrame& frame);
    bool grasped() const { return grasped_; }

private:
    TouchFrame previous_{};
    bool grasped_ = false;
};

// ---------------------------------------------------------------------------
// Patterns and scoring

struct RhythmPattern {
    std::array<std::int64_t, kNotesPerPattern> note_onsets_ms{};
    std::int64_t note_duration_ms = 100;

    /// Onsets strictly increasing and separated by at least one note length.
    void validate() const;

    bool operator==(const RhythmPattern&) const = default;
};

struct PatternConfig {
    std::int64_t lead_in_ms = 500;  // first onset offset from round start
    std::int64_t min_gap_ms = 400;
    std::int64_t max_gap_ms = 1200;
    std::int64_t note_duration_ms = 100;

    void validate() const;
};

/// Inter-onset gaps are drawn uniformly from [min_gap_ms, max_gap_ms].
RhythmPattern generate_pattern(Rng& rng, const PatternConfig& config = {});

struct GameAttempt {
    RhythmPattern pattern;
    std::vector<std::int64_t> squeeze_onsets_ms;  // relative to response start
    std::array<bool, kNotesPerPattern> per_note_matched{};
    double accuracy = 0.0;

    int matched_count() const;
    bool operator==(const GameAttempt&) const = default;
};

/// Greedy in-order matching: note i takes the earliest unconsumed squeeze
/// within +/-tolerance_ms of its onset. Squeezes must be sorted ascending.
GameAttempt score_attempt(const RhythmPattern& pattern, std::span<const std::int64_t> squeezes,
                          std::int64_t tolerance_ms = kDefaultToleranceMs);

// ---------------------------------------------------------------------------
// Round state machine

enum class RoundPhase { Idle, Prompting, Listening, Scored };
enum class RoundEventKind { Grasp, Release, Squeeze, Timer };

std::string_view to_string(RoundPhase phase);
std::string_view to_string(RoundEventKind kind);

struct RoundConfig {
    PatternConfig pattern;
    std::int64_t tolerance_ms = kDefaultToleranceMs;
    std::int64_t response_tail_ms = 2000;  // listening closes at last onset + tail
    bool tutorial = false;                 // also show the pattern as stars

    void validate() const;
};

struct VibrationCommand {
    TimestampMs at_ms = 0;
    std::int64_t duration_ms = 0;
    int note = 0;
};

struct StarVisualization {
    TimestampMs at_ms = 0;
    int note = 0;
};

struct PromptFinished {
    TimestampMs response_start_ms = 0;
};

struct AttemptScored {
    GameAttempt attempt;
};

struct RoundAborted {
    std::string reason;
};

struct EventIgnored {
    RoundEventKind kind;
    RoundPhase phase;
};

using RoundOutput =
    std::variant<VibrationCommand, StarVisualization, PromptFinished, AttemptScored, RoundAborted, EventIgnored>;

/// Idle -(grasp)-> Prompting -(prompt end)-> Listening -(window close)->
/// Scored -> Idle. Releasing before the round is scored aborts it. Deadlines
/// are handled lazily: every call first advances through any deadline at or
/// before `now_ms`, so a Timer event is just a clock advance.
class RhythmRound {
public:
    RhythmRound(RoundConfig config, std::uint64_t seed);

    std::vector<RoundOutput> step(RoundEventKind event, TimestampMs now_ms);

    RoundPhase phase() const { return phase_; }
    const std::optional<RhythmPattern>& pattern() const { return pattern_; }
    const RoundConfig& config() const { return config_; }

    /// Start of the current round's response phase (valid once Listening).
    TimestampMs response_start_ms() const { return response_start_ms_; }

    /// Next time at which the machine changes phase on its own.
    std::optional<TimestampMs> next_deadline() const;

private:
    void advance(TimestampMs now_ms, std::vector<RoundOutput>& out);
    TimestampMs prompt_end_ms() const;
    TimestampMs window_close_ms() const;

    RoundConfig config_;
    Rng rng_;
    RoundPhase phase_ = RoundPhase::Idle;
    std::optional<RhythmPattern> pattern_;
    TimestampMs grasp_ms_ = 0;
    TimestampMs response_start_ms_ = 0;
    TimestampMs last_event_ms_ = 0;
    std::vector<std::int64_t> squeezes_;
};

}  // namespace affecta

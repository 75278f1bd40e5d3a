#include "affecta/game.hpp"

#include <algorithm>
#include <stdexcept>

namespace affecta {

int TouchFrame::active_count() const {
    return static_cast<int>(std::count(channels.begin(), channels.end(), true));
}

std::string TouchFrame::bits() const {
    std::string out;
    out.reserve(kSensorCount);
    for (bool c : channels) out.push_back(c ? '1' : '0');
    return out;
}

TouchFrame TouchFrame::from_bits(std::string_view bits) {
    if (bits.size() != kSensorCount) {
        throw std::invalid_argument("touch frame needs exactly 5 channels, got '" + std::string(bits) + "'");
    }
    TouchFrame f;
    for (std::size_t i = 0; i < kSensorCount; ++i) {
        if (bits[i] != '0' && bits[i] != '1') {
            throw std::invalid_argument("touch frame channels must be 0 or 1");
        }
        f.channels[i] = bits[i] == '1';
    }
    return f;
}

bool grasp_detected(const TouchFrame& frame) {
    return frame.active_count() >= 2 && (frame[Sensor::SideLeft] || frame[Sensor::SideRight]);
}

std::optional<GestureKind> TouchTracker::update(const TouchFrame& frame) {
    const bool now_grasped = grasp_detected(frame);
    std::optional<GestureKind> gesture;
    if (!grasped_ && now_grasped) {
        gesture = GestureKind::Grasp;
    } else if (grasped_ && !now_grasped) {
        gesture = GestureKind::Release;
    } else if (grasped_) {
        for (std::size_t i = 0; i < kSensorCount; ++i) {
            if (frame.channels[i] && !previous_.channels[i]) {
                gesture = GestureKind::Squeeze;
                break;
            }
        }
    }
    grasped_ = now_grasped;
    previous_ = frame;
    return gesture;
}

void RhythmPattern::validate() const {
    if (note_duration_ms <= 0) {
        throw std::invalid_argument("note duration must be positive");
    }
    if (note_onsets_ms[0] < 0) {
        throw std::invalid_argument("note onsets must be non-negative");
    }
    for (std::size_t i = 1; i < kNotesPerPattern; ++i) {
        if (note_onsets_ms[i] - note_onsets_ms[i - 1] < std::max<std::int64_t>(1, note_duration_ms)) {
            throw std::invalid_argument("note onsets must increase by at least one note duration");
        }
    }
}

void PatternConfig::validate() const {
    if (lead_in_ms < 0) throw std::invalid_argument("lead-in must be non-negative");
    if (note_duration_ms <= 0) throw std::invalid_argument("note duration must be positive");
    if (min_gap_ms > max_gap_ms) throw std::invalid_argument("min_gap_ms exceeds max_gap_ms");
    if (min_gap_ms < note_duration_ms) throw std::invalid_argument("min_gap_ms shorter than a note");
}

RhythmPattern generate_pattern(Rng& rng, const PatternConfig& config) {
    config.validate();
    RhythmPattern p;
    p.note_duration_ms = config.note_duration_ms;
    p.note_onsets_ms[0] = config.lead_in_ms;
    for (std::size_t i = 1; i < kNotesPerPattern; ++i) {
        p.note_onsets_ms[i] = p.note_onsets_ms[i - 1] + rng.uniform_int(config.min_gap_ms, config.max_gap_ms);
    }
    return p;
}

int GameAttempt::matched_count() const {
    return static_cast<int>(std::count(per_note_matched.begin(), per_note_matched.end(), true));
}

GameAttempt score_attempt(const RhythmPattern& pattern, std::span<const std::int64_t> squeezes,
                          std::int64_t tolerance_ms) {
    if (tolerance_ms <= 0) {
        throw std::invalid_argument("tolerance must be positive");
    }
    if (!std::is_sorted(squeezes.begin(), squeezes.end())) {
        throw std::invalid_argument("squeeze timestamps must be sorted ascending");
    }

    GameAttempt attempt;
    attempt.pattern = pattern;
    attempt.squeeze_onsets_ms.assign(squeezes.begin(), squeezes.end());

    std::size_t next = 0;  // squeezes before `next` are consumed or skipped
    for (std::size_t note = 0; note < kNotesPerPattern; ++note) {
        const std::int64_t onset = pattern.note_onsets_ms[note];
        while (next < squeezes.size() && squeezes[next] < onset - tolerance_ms) {
            ++next;
        }
        if (next < squeezes.size() && squeezes[next] <= onset + tolerance_ms) {
            attempt.per_note_matched[note] = true;
            ++next;
        }
    }
    attempt.accuracy = attempt.matched_count() / static_cast<double>(kNotesPerPattern);
    return attempt;
}

std::string_view to_string(RoundPhase phase) {
    switch (phase) {
        case RoundPhase::Idle: return "idle";
        case RoundPhase::Prompting: return "prompting";
        case RoundPhase::Listening: return "listening";
        case RoundPhase::Scored: return "scored";
    }
    return "?";
}

std::string_view to_string(RoundEventKind kind) {
    switch (kind) {
        case RoundEventKind::Grasp: return "grasp";
        case RoundEventKind::Release: return "release";
        case RoundEventKind::Squeeze: return "squeeze";
        case RoundEventKind::Timer: return "timer";
    }
    return "?";
}

void RoundConfig::validate() const {
    pattern.validate();
    if (tolerance_ms <= 0) throw std::invalid_argument("tolerance must be positive");
    if (response_tail_ms <= tolerance_ms) throw std::invalid_argument("response tail must exceed the tolerance");
}

RhythmRound::RhythmRound(RoundConfig config, std::uint64_t seed) : config_(std::move(config)), rng_(seed) {
    config_.validate();
}

TimestampMs RhythmRound::prompt_end_ms() const {
    return grasp_ms_ + pattern_->note_onsets_ms.back() + pattern_->note_duration_ms;
}

TimestampMs RhythmRound::window_close_ms() const {
    return response_start_ms_ + pattern_->note_onsets_ms.back() + config_.response_tail_ms;
}

std::optional<TimestampMs> RhythmRound::next_deadline() const {
    switch (phase_) {
        case RoundPhase::Prompting: return prompt_end_ms();
        case RoundPhase::Listening: return window_close_ms();
        default: return std::nullopt;
    }
}

void RhythmRound::advance(TimestampMs now_ms, std::vector<RoundOutput>& out) {
    if (phase_ == RoundPhase::Scored) {
        phase_ = RoundPhase::Idle;
    }
    if (phase_ == RoundPhase::Prompting && now_ms >= prompt_end_ms()) {
        phase_ = RoundPhase::Listening;
        response_start_ms_ = prompt_end_ms();
        out.emplace_back(PromptFinished{response_start_ms_});
    }
    if (phase_ == RoundPhase::Listening && now_ms >= window_close_ms()) {
        phase_ = RoundPhase::Scored;
        out.emplace_back(AttemptScored{score_attempt(*pattern_, squeezes_, config_.tolerance_ms)});
    }
}

std::vector<RoundOutput> RhythmRound::step(RoundEventKind event, TimestampMs now_ms) {
    if (now_ms < last_event_ms_) {
        throw TimeRegressionError("round event at " + std::to_string(now_ms) + " precedes previous event at " +
                                  std::to_string(last_event_ms_));
    }
    last_event_ms_ = now_ms;

    std::vector<RoundOutput> out;
    // A gesture landing exactly on a deadline sees the post-deadline phase.
    advance(now_ms, out);

    switch (event) {
        case RoundEventKind::Timer:
            break;
        case RoundEventKind::Grasp:
            if (phase_ != RoundPhase::Idle) {
                out.emplace_back(EventIgnored{event, phase_});
                break;
            }
            grasp_ms_ = now_ms;
            pattern_ = generate_pattern(rng_, config_.pattern);
            squeezes_.clear();
            phase_ = RoundPhase::Prompting;
            for (std::size_t i = 0; i < kNotesPerPattern; ++i) {
                const TimestampMs at = now_ms + pattern_->note_onsets_ms[i];
                out.emplace_back(VibrationCommand{at, pattern_->note_duration_ms, static_cast<int>(i)});
                if (config_.tutorial) {
                    out.emplace_back(StarVisualization{at, static_cast<int>(i)});
                }
            }
            break;
        case RoundEventKind::Release:
            if (phase_ == RoundPhase::Prompting || phase_ == RoundPhase::Listening) {
                out.emplace_back(RoundAborted{std::string("released while ") + std::string(to_string(phase_))});
                phase_ = RoundPhase::Idle;
                squeezes_.clear();
            } else {
                out.emplace_back(EventIgnored{event, phase_});
            }
            break;
        case RoundEventKind::Squeeze:
            if (phase_ == RoundPhase::Listening) {
                squeezes_.push_back(now_ms - response_start_ms_);
            } else {
                out.emplace_back(EventIgnored{event, phase_});
            }
            break;
    }
    return out;
}

}  // namespace affecta

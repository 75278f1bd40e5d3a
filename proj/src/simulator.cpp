#include "affecta/simulator.hpp"

#include "affecta/digest.hpp"
#include "affecta/random.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace affecta {

void UserProfile::validate() const {
    if (!(interaction_rate_per_min > 0.0) || !std::isfinite(interaction_rate_per_min)) {
        throw std::invalid_argument("interaction rate must be positive");
    }
    if (!(timing_jitter_sigma_ms >= 0.0) || !std::isfinite(timing_jitter_sigma_ms)) {
        throw std::invalid_argument("timing jitter sigma must be non-negative");
    }
    if (!std::isfinite(jitter_drift_ms_per_min)) throw std::invalid_argument("jitter drift must be finite");
    if (!(abandon_probability >= 0.0 && abandon_probability <= 1.0)) {
        throw std::invalid_argument("abandon probability must lie in [0, 1]");
    }
}

double UserProfile::sigma_at(TimestampMs t_ms) const {
    const double minutes = static_cast<double>(t_ms) / 60000.0;
    return std::max(0.0, timing_jitter_sigma_ms + jitter_drift_ms_per_min * minutes);
}

void Scenario::validate() const {
    if (!(duration_minutes > 0.0) || !std::isfinite(duration_minutes)) {
        throw std::invalid_argument("scenario duration must be positive");
    }
    if (cohort.empty()) throw std::invalid_argument("scenario cohort is empty");
    for (const auto& p : cohort) p.validate();
}

namespace {

class SessionSimulator {
public:
    SessionSimulator(const UserProfile& profile, Condition condition, double duration_minutes,
                     const SimulationOptions& options, const std::string& session_id, const std::string& scenario)
        : profile_(profile),
          options_(options),
          strategy_{.kind = condition},
          end_ms_(std::llround(duration_minutes * 60000.0)),
          rng_(profile.seed),
          machine_(options.round, rng_.split()),
          writer_(LogHeader{.session_id = session_id,
                            .scenario = scenario,
                            .condition = condition,
                            .seed = profile.seed,
                            .duration_ms = end_ms_,
                            .params = options.engine,
                            .params_digest = {}}) {}

    SessionLog run() {
        const SessionStart start = start_session(strategy_, options_.engine, 0);
        engagement_ = start.state;
        log_feedback(start.initial_face);
        log_snapshot(0);

        next_grasp_ms_ = sample_idle_gap(0);
        next_heartbeat_ms_ = options_.heartbeat_interval_ms;
        next_snapshot_ms_ = options_.snapshot_interval_ms;

        while (step()) {
        }
        return std::move(writer_).finish(end_ms_);
    }

private:
    enum class Source { Deadline, Action, Heartbeat, Snapshot };

    bool step() {
        if (actions_.empty() && !tracker_.grasped() && next_grasp_ms_ < end_ms_) {
            schedule_grasp(next_grasp_ms_);
        }

        std::optional<std::pair<TimestampMs, Source>> next;
        auto consider = [&next](std::optional<TimestampMs> t, Source s) {
            if (t && (!next || *t < next->first)) next = {{*t, s}};
        };
        consider(machine_.next_deadline(), Source::Deadline);
        consider(actions_.empty() ? std::nullopt : std::optional(actions_.front().first), Source::Action);
        consider(next_heartbeat_ms_ <= end_ms_ ? std::optional(next_heartbeat_ms_) : std::nullopt, Source::Heartbeat);
        consider(next_snapshot_ms_ <= end_ms_ ? std::optional(next_snapshot_ms_) : std::nullopt, Source::Snapshot);
        if (!next) return false;

        const TimestampMs t = next->first;
        switch (next->second) {
            case Source::Deadline:
                handle_outputs(machine_.step(RoundEventKind::Timer, t), t);
                break;
            case Source::Action: {
                const TouchFrame frame = actions_.front().second;
                actions_.pop_front();
                apply_frame(frame, t);
                break;
            }
            case Source::Heartbeat: {
                HeartbeatOutcome hb = idle_heartbeat(strategy_, options_.engine, engagement_, t);
                engagement_ = hb.state;
                if (hb.event) log_feedback(*hb.event);
                next_heartbeat_ms_ += options_.heartbeat_interval_ms;
                break;
            }
            case Source::Snapshot:
                log_snapshot(t);
                next_snapshot_ms_ += options_.snapshot_interval_ms;
                break;
        }
        return true;
    }

    TimestampMs sample_idle_gap(TimestampMs from) {
        const double minutes = rng_.exponential(profile_.interaction_rate_per_min);
        return from + std::max<TimestampMs>(1, std::llround(minutes * 60000.0));
    }

    void schedule_grasp(TimestampMs t) {
        grasp_frame_ = TouchFrame{};
        grasp_frame_[Sensor::SideLeft] = true;
        grasp_frame_[Sensor::SideRight] = true;
        grasp_frame_[Sensor::BackLeft] = rng_.uniform() < 0.5;
        grasp_frame_[Sensor::BackRight] = rng_.uniform() < 0.5;
        actions_.emplace_back(t, grasp_frame_);
    }

    void apply_frame(const TouchFrame& frame, TimestampMs t) {
        writer_.append(t, rec::Touch{frame});
        const auto gesture = tracker_.update(frame);
        if (!gesture) return;
        switch (*gesture) {
            case GestureKind::Grasp:
                writer_.append(t, rec::Grasp{});
                handle_outputs(machine_.step(RoundEventKind::Grasp, t), t);
                plan_round(t);
                break;
            case GestureKind::Release:
                writer_.append(t, rec::Release{});
                handle_outputs(machine_.step(RoundEventKind::Release, t), t);
                next_grasp_ms_ = sample_idle_gap(t);
                break;
            case GestureKind::Squeeze:
                writer_.append(t, rec::Squeeze{});
                handle_outputs(machine_.step(RoundEventKind::Squeeze, t), t);
                break;
        }
    }

    // Decides how the user responds to the pattern just played and queues the
    // corresponding touch frames.
    void plan_round(TimestampMs grasp_ms) {
        const RhythmPattern& pattern = *machine_.pattern();
        const TimestampMs prompt_end = grasp_ms + pattern.note_onsets_ms.back() + pattern.note_duration_ms;
        const TimestampMs window_close = prompt_end + pattern.note_onsets_ms.back() + options_.round.response_tail_ms;

        TimestampMs release_ms;
        if (rng_.uniform() < profile_.abandon_probability) {
            release_ms = grasp_ms + rng_.uniform_int(1, window_close - grasp_ms - 1);
        } else {
            release_ms = window_close + rng_.uniform_int(200, 1500);
        }

        const double sigma = profile_.sigma_at(grasp_ms);
        std::vector<TimestampMs> presses;
        for (std::int64_t onset : pattern.note_onsets_ms) {
            const TimestampMs s = prompt_end + onset + std::llround(sigma * rng_.normal());
            if (s > grasp_ms && s < release_ms) presses.push_back(s);
        }
        std::sort(presses.begin(), presses.end());

        TouchFrame pressed = grasp_frame_;
        pressed[Sensor::Front] = true;
        for (std::size_t i = 0; i < presses.size(); ++i) {
            const TimestampMs limit = i + 1 < presses.size() ? presses[i + 1] : release_ms;
            const TimestampMs hold = std::min<TimestampMs>(60, limit - presses[i] - 1);
            if (hold < 1) continue;  // too close to the next press to register separately
            actions_.emplace_back(presses[i], pressed);
            actions_.emplace_back(presses[i] + hold, grasp_frame_);
        }
        actions_.emplace_back(release_ms, TouchFrame{});
    }

    void handle_outputs(const std::vector<RoundOutput>& outputs, TimestampMs t) {
        for (const auto& out : outputs) {
            if (const auto* v = std::get_if<VibrationCommand>(&out)) {
                writer_.append(t, rec::Vibration{v->at_ms, v->duration_ms, v->note});
            } else if (const auto* s = std::get_if<StarVisualization>(&out)) {
                writer_.append(t, rec::Star{s->at_ms, s->note});
            } else if (const auto* a = std::get_if<AttemptScored>(&out)) {
                const GameAttempt& g = a->attempt;
                writer_.append(t, rec::AttemptScored{g.pattern.note_onsets_ms, g.pattern.note_duration_ms,
                                                     g.squeeze_onsets_ms, g.per_note_matched, g.accuracy});
                ScoredOutcome scored = on_game_scored(strategy_, options_.engine, g, engagement_, t);
                engagement_ = scored.state;
                log_feedback(scored.event);
            } else if (const auto* ab = std::get_if<RoundAborted>(&out)) {
                writer_.append(t, rec::RoundAborted{ab->reason});
            }
        }
    }

    void log_feedback(const FeedbackEvent& event) {
        if (const auto* face = std::get_if<FaceUpdate>(&event.payload)) {
            writer_.append(event.timestamp_ms,
                           rec::Face{face->mood, face->face.eyebrow_angle_deg, face->face.eye_curvature});
        } else {
            const auto& coin = std::get<CoinAward>(event.payload);
            writer_.append(event.timestamp_ms, rec::Coin{coin.points, engagement_.ledger.total_points});
        }
    }

    void log_snapshot(TimestampMs t) {
        if (strategy_.kind == Condition::Emotions) {
            engagement_.mood = tick(engagement_.mood, options_.engine, t);
        }
        const MoodState& m = engagement_.mood;
        writer_.append(t, rec::TickSnapshot{m.mood, m.decay_rate, m.impact});
    }

    UserProfile profile_;
    SimulationOptions options_;
    StrategyConfig strategy_;
    TimestampMs end_ms_;
    Rng rng_;
    RhythmRound machine_;
    LogWriter writer_;
    TouchTracker tracker_;
    EngagementState engagement_;
    TouchFrame grasp_frame_;
    std::deque<std::pair<TimestampMs, TouchFrame>> actions_;
    TimestampMs next_grasp_ms_ = 0;
    TimestampMs next_heartbeat_ms_ = 0;
    TimestampMs next_snapshot_ms_ = 0;
};

}  // namespace

SessionLog run_session(const UserProfile& profile, Condition condition, double duration_minutes,
                       const SimulationOptions& options, const std::string& session_id,
                       const std::string& scenario_name) {
    profile.validate();
    options.engine.validate();
    options.round.validate();
    if (!(duration_minutes > 0.0)) throw std::invalid_argument("session duration must be positive");
    if (options.heartbeat_interval_ms <= 0 || options.snapshot_interval_ms <= 0) {
        throw std::invalid_argument("heartbeat and snapshot intervals must be positive");
    }
    return SessionSimulator(profile, condition, duration_minutes, options, session_id, scenario_name).run();
}

std::vector<SessionLog> run_scenario(const Scenario& scenario, const SimulationOptions& options, unsigned threads) {
    scenario.validate();
    auto session_id = [&](std::size_t i) {
        std::string idx = std::to_string(i + 1);
        if (idx.size() < 2) idx.insert(0, 2 - idx.size(), '0');
        return scenario.name + "-" + idx;
    };
    auto run_one = [&](std::size_t i) {
        return run_session(scenario.cohort[i], scenario.condition, scenario.duration_minutes, options, session_id(i),
                           scenario.name);
    };

    std::vector<SessionLog> logs(scenario.cohort.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < logs.size(); ++i) logs[i] = run_one(i);
        return logs;
    }
    std::vector<std::future<SessionLog>> futures;
    std::size_t next = 0;
    while (next < logs.size()) {
        futures.clear();
        const std::size_t batch_start = next;
        for (unsigned k = 0; k < threads && next < logs.size(); ++k, ++next) {
            futures.push_back(std::async(std::launch::async, run_one, next));
        }
        for (std::size_t k = 0; k < futures.size(); ++k) logs[batch_start + k] = futures[k].get();
    }
    return logs;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

struct PresetMember {
    double rate;
    double sigma;
    double drift;
    double abandon;
};

// Emotions: timing noise grows over the session, accuracy falls from roughly
// 56% in the first five minutes to roughly 42% after twenty.
constexpr PresetMember kEmotionsPreset[] = {
    {1.6, 175.0, 3.2, 0.06}, {1.9, 185.0, 3.6, 0.05}, {2.1, 190.0, 3.4, 0.08}, {2.3, 195.0, 3.8, 0.04},
    {2.6, 200.0, 3.5, 0.06}, {3.0, 205.0, 3.9, 0.05}, {4.5, 215.0, 3.3, 0.07},
};

// Points: timing noise shrinks slightly, accuracy rises from roughly 65% to
// roughly 74%. The rate spread is deliberately skewed (one heavy player).
constexpr PresetMember kPointsPreset[] = {
    {2.0, 142.0, -0.8, 0.03}, {2.3, 147.0, -0.9, 0.04}, {2.6, 150.0, -0.8, 0.02}, {2.9, 153.0, -1.0, 0.03},
    {3.3, 156.0, -0.9, 0.05}, {3.8, 158.0, -0.8, 0.03}, {7.5, 162.0, -1.1, 0.02},
};

Scenario build_preset(std::string_view name, Condition condition, std::span<const PresetMember> members,
                      std::uint64_t seed) {
    Scenario s;
    s.name = std::string(name);
    s.condition = condition;
    s.duration_minutes = 30.0;
    Fnv1a h;
    h.add_bytes(name);
    std::uint64_t state = seed ^ h.value();
    for (const auto& m : members) {
        state = splitmix64(state);
        s.cohort.push_back(UserProfile{m.rate, m.sigma, m.drift, m.abandon, state});
    }
    return s;
}

}  // namespace

std::vector<std::string> paper_scenario_names() { return {"paper-emotions", "paper-points"}; }

Scenario paper_scenario(std::string_view name, std::uint64_t seed) {
    if (name == "paper-emotions") return build_preset(name, Condition::Emotions, kEmotionsPreset, seed);
    if (name == "paper-points") return build_preset(name, Condition::Points, kPointsPreset, seed);
    throw std::invalid_argument("unknown scenario '" + std::string(name) +
                                "' (available: paper-emotions, paper-points)");
}

std::vector<SessionLog> run_paper_scenario(std::string_view name, std::uint64_t seed,
                                           const SimulationOptions& options, unsigned threads) {
    return run_scenario(paper_scenario(name, seed), options, threads);
}

// ---------------------------------------------------------------------------
// Scenario files

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad number for " + what + ": '" + text + "'");
    }
    if (used != text.size()) throw std::invalid_argument("bad number for " + what + ": '" + text + "'");
    return v;
}

UserProfile parse_profile(const std::string& spec, std::size_t line) {
    UserProfile p;
    std::istringstream in(spec);
    std::string item;
    bool have_seed = false;
    while (in >> item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("line " + std::to_string(line) + ": profile entries are key=value");
        }
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        const std::string what = "profile " + key + " (line " + std::to_string(line) + ")";
        if (key == "rate") p.interaction_rate_per_min = parse_number(value, what);
        else if (key == "sigma") p.timing_jitter_sigma_ms = parse_number(value, what);
        else if (key == "drift") p.jitter_drift_ms_per_min = parse_number(value, what);
        else if (key == "abandon") p.abandon_probability = parse_number(value, what);
        else if (key == "seed") {
            try {
                std::size_t used = 0;
                p.seed = std::stoull(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw std::invalid_argument("bad seed for " + what + ": '" + value + "'");
            }
            have_seed = true;
        } else {
            throw std::invalid_argument("line " + std::to_string(line) + ": unknown profile key '" + key + "'");
        }
    }
    if (!have_seed) p.seed = splitmix64(line);
    p.validate();
    return p;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    Scenario s;
    bool have_name = false;
    bool have_condition = false;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "name") {
            s.name = value;
            have_name = true;
        } else if (key == "condition") {
            s.condition = parse_condition(value);
            have_condition = true;
        } else if (key == "duration_minutes") {
            s.duration_minutes = parse_number(value, "duration_minutes");
        } else if (key == "profile") {
            s.cohort.push_back(parse_profile(value, line_no));
        } else {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (!have_name || s.name.empty()) throw std::invalid_argument("scenario file must set a name");
    if (!have_condition) throw std::invalid_argument("scenario file must set a condition");
    s.validate();
    return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

}  // namespace affecta

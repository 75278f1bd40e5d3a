#pragma once

// Seeded discrete-event simulation of users playing the rhythm game under
// either feedback strategy. Time is simulated; nothing reads a clock.

#include "affecta/affect.hpp"
#include "affecta/engagement.hpp"
#include "affecta/game.hpp"
#include "affecta/session_log.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace affecta {

/// Behavioral model of one simulated participant.
struct UserProfile {
    double interaction_rate_per_min = 2.0;  // mean grasps per idle minute
    double timing_jitter_sigma_ms = 150.0;  // squeeze timing noise at t = 0
    double jitter_drift_ms_per_min = 0.0;   // signed linear change of sigma
    double abandon_probability = 0.0;       // per-round early release
    std::uint64_t seed = 0;

    void validate() const;
    /// Jitter sigma at a point in the session, floored at zero.
    double sigma_at(TimestampMs t_ms) const;
};

struct Scenario {
    std::string name;
    Condition condition = Condition::Emotions;
    double duration_minutes = 30.0;
    std::vector<UserProfile> cohort;

    void validate() const;
};

struct SimulationOptions {
    EngineParams engine;
    RoundConfig round;
    std::int64_t heartbeat_interval_ms = 5000;
    std::int64_t snapshot_interval_ms = 60000;
};

/// Simulates one session. Deterministic for a fixed profile seed.
SessionLog run_session(const UserProfile& profile, Condition condition, double duration_minutes,
                       const SimulationOptions& options = {}, const std::string& session_id = "session",
                       const std::string& scenario_name = "custom");

/// Simulates every cohort member, in parallel when `threads` > 1. Output
/// order follows the cohort.
std::vector<SessionLog> run_scenario(const Scenario& scenario, const SimulationOptions& options = {},
                                     unsigned threads = 1);

inline constexpr std::uint64_t kReferenceSeed = 42;

std::vector<std::string> paper_scenario_names();

/// Seven-participant presets calibrated against target accuracy
/// trajectories. Throws std::invalid_argument for unknown names.
Scenario paper_scenario(std::string_view name, std::uint64_t seed = kReferenceSeed);

std::vector<SessionLog> run_paper_scenario(std::string_view name, std::uint64_t seed = kReferenceSeed,
                                           const SimulationOptions& options = {}, unsigned threads = 1);

/// Plain-text scenario description, one `key = value` per line:
///   name = my-study
///   condition = points
///   duration_minutes = 30
///   profile = rate=2.5 sigma=160 drift=-1 abandon=0.05 seed=7
/// `#` starts a comment. Unknown keys are errors.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);

}  // namespace affecta

#pragma once

// Engagement metrics over session time windows and the two-condition study
// report built on top of them.

#include "affecta/engagement.hpp"
#include "affecta/session_log.hpp"
#include "affecta/stats.hpp"

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace affecta {

/// Window boundaries in minutes. The last edge may be +infinity, in which case
/// the final window runs to the end of the session.
struct WindowEdges {
    std::vector<double> minutes;

    void validate() const;
    std::size_t window_count() const { return minutes.size() - 1; }
    std::string label(std::size_t window) const;

    static WindowEdges defaults();
    /// Parses "0,5,10,20" (an open final window is implied) or "0,5,10,20,inf".
    static WindowEdges parse(const std::string& text);
};

struct WindowMetrics {
    double start_min = 0.0;
    double end_min = 0.0;          // may be +infinity
    double covered_min = 0.0;      // part of the window inside the session
    std::size_t attempts = 0;
    std::optional<double> accuracy_mean;  // absent when the window has no attempts
    std::optional<double> accuracy_sd;    // absent with fewer than two attempts
    std::optional<double> games_per_minute;  // absent when covered_min == 0
};

struct SessionMetrics {
    std::string session_id;
    Condition condition = Condition::Emotions;
    double duration_min = 0.0;
    std::size_t total_game_attempts = 0;
    std::size_t total_physical_interactions = 0;  // grasp episodes
    std::size_t touch_frames = 0;
    std::size_t aborted_rounds = 0;
    std::optional<double> accuracy_mean;
    std::optional<double> accuracy_sd;
    std::vector<WindowMetrics> windows;

    std::size_t engagement_volume() const { return total_game_attempts + total_physical_interactions; }
};

/// Mean and spread of one per-session quantity across a condition's sessions.
struct CohortStat {
    std::size_t n = 0;  // sessions with a value
    std::optional<double> mean;
    std::optional<double> sd;
    std::optional<double> sem;
};

struct ConditionMetrics {
    Condition condition = Condition::Emotions;
    std::size_t sessions = 0;
    CohortStat accuracy;
    CohortStat game_attempts;
    CohortStat physical_interactions;
    std::vector<CohortStat> window_accuracy;
    std::vector<CohortStat> window_games_per_minute;
};

struct MetricsReport {
    WindowEdges edges;
    std::vector<SessionMetrics> sessions;
    std::vector<ConditionMetrics> conditions;  // only conditions present
};

SessionMetrics session_metrics(const SessionLog& log, const WindowEdges& edges = WindowEdges::defaults());

/// Per-session metrics plus per-condition aggregates. Condition aggregates
/// weight every session equally (mean of session means).
MetricsReport windowed_metrics(std::span<const SessionLog> logs, const WindowEdges& edges = WindowEdges::defaults());

// ---------------------------------------------------------------------------
// Study report

struct MetricComparison {
    std::string metric;
    stats::Summary emotions;
    stats::Summary points;
    std::size_t imputed_emotions = 0;
    std::size_t imputed_points = 0;
    std::optional<double> normality_p_emotions;  // absent when the gate could not run
    std::optional<double> normality_p_points;
    bool normal = false;
    std::optional<stats::TestResult> test;
    std::string note;

    bool significant() const { return test && test->p_value < stats::kAlpha; }
};

struct StudyReport {
    MetricsReport metrics;
    std::vector<MetricComparison> comparisons;
};

/// Imputes missing per-session values within each condition, gates each
/// metric on Shapiro-Wilk normality of both groups (alpha .05) and runs an
/// independent t test when both pass, a Mann-Whitney U test otherwise.
/// Effect sizes are oriented emotions minus points. Both cohorts need at least
/// two sessions.
StudyReport study_report(std::span<const SessionLog> emotions, std::span<const SessionLog> points,
                         const WindowEdges& edges = WindowEdges::defaults());

std::string format_metrics_table(const MetricsReport& report);
std::string format_report_table(const StudyReport& report);
std::string report_to_json(const StudyReport& report);
std::string metrics_to_json(const MetricsReport& report);
/// One row per (condition, window): the data behind the accuracy and
/// games-per-minute bar charts.
std::string window_csv(const MetricsReport& report);

}  // namespace affecta

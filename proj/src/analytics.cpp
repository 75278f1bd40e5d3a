#include "affecta/analytics.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace affecta {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMsPerMinute = 60000.0;

std::string format_edge(double minutes) {
    if (std::isinf(minutes)) return "inf";
    return fmt::format("{:g}", minutes);
}

CohortStat cohort_stat(const std::vector<double>& values) {
    CohortStat c;
    c.n = values.size();
    if (values.empty()) return c;
    const stats::Summary s = stats::summarize(values);
    c.mean = s.mean;
    if (s.n >= 2) {
        c.sd = s.sd;
        c.sem = s.sd / std::sqrt(static_cast<double>(s.n));
    }
    return c;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json cohort_json(const CohortStat& c) {
    return Json{{"n", c.n}, {"mean", opt(c.mean)}, {"sd", opt(c.sd)}, {"sem", opt(c.sem)}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Windows

void WindowEdges::validate() const {
    if (minutes.size() < 2) throw std::invalid_argument("need at least two window edges");
    if (minutes.front() != 0.0) throw std::invalid_argument("first window edge must be 0");
    if (!std::isinf(minutes.back())) throw std::invalid_argument("last window must be open-ended");
    for (std::size_t i = 1; i < minutes.size(); ++i) {
        if (!(minutes[i] > minutes[i - 1])) throw std::invalid_argument("window edges must be strictly increasing");
        if (i + 1 < minutes.size() && !std::isfinite(minutes[i])) {
            throw std::invalid_argument("only the last window edge may be infinite");
        }
    }
}

std::string WindowEdges::label(std::size_t window) const {
    const double lo = minutes.at(window);
    const double hi = minutes.at(window + 1);
    if (std::isinf(hi)) return format_edge(lo) + "+";
    return format_edge(lo) + "-" + format_edge(hi);
}

WindowEdges WindowEdges::defaults() { return WindowEdges{{0.0, 5.0, 10.0, 20.0, kInf}}; }

WindowEdges WindowEdges::parse(const std::string& text) {
    WindowEdges edges;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf" || item == "+inf") {
            edges.minutes.push_back(kInf);
            continue;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad window edge '" + item + "'");
        }
        if (used != item.size()) throw std::invalid_argument("bad window edge '" + item + "'");
        edges.minutes.push_back(v);
    }
    if (!edges.minutes.empty() && !std::isinf(edges.minutes.back())) edges.minutes.push_back(kInf);
    edges.validate();
    return edges;
}

// ---------------------------------------------------------------------------
// Metrics

SessionMetrics session_metrics(const SessionLog& log, const WindowEdges& edges) {
    edges.validate();
    SessionMetrics m;
    m.session_id = log.header.session_id;
    m.condition = log.header.condition;
    m.duration_min = static_cast<double>(log.elapsed_ms()) / kMsPerMinute;

    const std::size_t nw = edges.window_count();
    std::vector<std::vector<double>> per_window(nw);
    std::vector<double> all;

    for (const auto& r : log.records) {
        if (const auto* a = std::get_if<rec::AttemptScored>(&r.body)) {
            const double minute = static_cast<double>(r.t_ms) / kMsPerMinute;
            const auto upper = std::upper_bound(edges.minutes.begin(), edges.minutes.end(), minute);
            const std::size_t w = static_cast<std::size_t>(upper - edges.minutes.begin()) - 1;
            per_window[w].push_back(a->accuracy);
            all.push_back(a->accuracy);
        } else if (std::holds_alternative<rec::Grasp>(r.body)) {
            ++m.total_physical_interactions;
        } else if (std::holds_alternative<rec::Touch>(r.body)) {
            ++m.touch_frames;
        } else if (std::holds_alternative<rec::RoundAborted>(r.body)) {
            ++m.aborted_rounds;
        }
    }

    m.total_game_attempts = all.size();
    if (!all.empty()) {
        const auto s = stats::summarize(all);
        m.accuracy_mean = s.mean;
        if (s.n >= 2) m.accuracy_sd = s.sd;
    }

    for (std::size_t w = 0; w < nw; ++w) {
        WindowMetrics wm;
        wm.start_min = edges.minutes[w];
        wm.end_min = edges.minutes[w + 1];
        wm.covered_min = std::max(0.0, std::min(wm.end_min, m.duration_min) - wm.start_min);
        wm.attempts = per_window[w].size();
        if (!per_window[w].empty()) {
            const auto s = stats::summarize(per_window[w]);
            wm.accuracy_mean = s.mean;
            if (s.n >= 2) wm.accuracy_sd = s.sd;
        }
        if (wm.covered_min > 0.0) wm.games_per_minute = static_cast<double>(wm.attempts) / wm.covered_min;
        m.windows.push_back(wm);
    }
    return m;
}

MetricsReport windowed_metrics(std::span<const SessionLog> logs, const WindowEdges& edges) {
    edges.validate();
    MetricsReport report;
    report.edges = edges;
    for (const auto& log : logs) report.sessions.push_back(session_metrics(log, edges));

    for (Condition cond : {Condition::Emotions, Condition::Points}) {
        std::vector<const SessionMetrics*> members;
        for (const auto& s : report.sessions) {
            if (s.condition == cond) members.push_back(&s);
        }
        if (members.empty()) continue;

        ConditionMetrics c;
        c.condition = cond;
        c.sessions = members.size();
        std::vector<double> acc, attempts, physical;
        for (const auto* s : members) {
            if (s->accuracy_mean) acc.push_back(*s->accuracy_mean);
            attempts.push_back(static_cast<double>(s->total_game_attempts));
            physical.push_back(static_cast<double>(s->total_physical_interactions));
        }
        c.accuracy = cohort_stat(acc);
        c.game_attempts = cohort_stat(attempts);
        c.physical_interactions = cohort_stat(physical);
        for (std::size_t w = 0; w < edges.window_count(); ++w) {
            std::vector<double> wacc, wgpm;
            for (const auto* s : members) {
                if (s->windows[w].accuracy_mean) wacc.push_back(*s->windows[w].accuracy_mean);
                if (s->windows[w].games_per_minute) wgpm.push_back(*s->windows[w].games_per_minute);
            }
            c.window_accuracy.push_back(cohort_stat(wacc));
            c.window_games_per_minute.push_back(cohort_stat(wgpm));
        }
        report.conditions.push_back(std::move(c));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Study report

namespace {

using Extractor = std::optional<double> (*)(const SessionMetrics&, std::size_t window);

struct MetricSpec {
    std::string name;
    std::size_t window;
    Extractor extract;
};

std::vector<MetricSpec> metric_specs(const WindowEdges& edges) {
    std::vector<MetricSpec> specs;
    specs.push_back({"accuracy_pct", 0, [](const SessionMetrics& s, std::size_t) {
                         return s.accuracy_mean ? std::optional<double>(100.0 * *s.accuracy_mean) : std::nullopt;
                     }});
    for (std::size_t w = 0; w < edges.window_count(); ++w) {
        specs.push_back({"accuracy_pct[" + edges.label(w) + "]", w, [](const SessionMetrics& s, std::size_t win) {
                             const auto& a = s.windows[win].accuracy_mean;
                             return a ? std::optional<double>(100.0 * *a) : std::nullopt;
                         }});
    }
    for (std::size_t w = 0; w < edges.window_count(); ++w) {
        specs.push_back({"games_per_min[" + edges.label(w) + "]", w,
                         [](const SessionMetrics& s, std::size_t win) { return s.windows[win].games_per_minute; }});
    }
    specs.push_back({"game_attempts", 0, [](const SessionMetrics& s, std::size_t) {
                         return std::optional<double>(static_cast<double>(s.total_game_attempts));
                     }});
    specs.push_back({"physical_interactions", 0, [](const SessionMetrics& s, std::size_t) {
                         return std::optional<double>(static_cast<double>(s.total_physical_interactions));
                     }});
    specs.push_back({"engagement_volume", 0, [](const SessionMetrics& s, std::size_t) {
                         return std::optional<double>(static_cast<double>(s.engagement_volume()));
                     }});
    return specs;
}

std::optional<double> normality_p(std::span<const double> values) {
    if (values.size() < 3 || values.size() > 50) return std::nullopt;
    try {
        return stats::shapiro_wilk(values).p_value;
    } catch (const std::invalid_argument&) {
        return std::nullopt;  // constant sample
    }
}

MetricComparison compare(const MetricSpec& spec, const std::vector<const SessionMetrics*>& emo,
                         const std::vector<const SessionMetrics*>& pts) {
    MetricComparison c;
    c.metric = spec.name;

    std::vector<std::optional<double>> values;
    std::vector<int> groups;
    for (const auto* s : emo) {
        values.push_back(spec.extract(*s, spec.window));
        groups.push_back(0);
    }
    for (const auto* s : pts) {
        values.push_back(spec.extract(*s, spec.window));
        groups.push_back(1);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i]) ++(groups[i] == 0 ? c.imputed_emotions : c.imputed_points);
    }
    if (c.imputed_emotions == emo.size() || c.imputed_points == pts.size()) {
        c.note = "no observations in one condition";
        return c;
    }

    const std::vector<double> completed = stats::mean_impute(values, groups);
    const std::vector<double> a(completed.begin(), completed.begin() + static_cast<std::ptrdiff_t>(emo.size()));
    const std::vector<double> b(completed.begin() + static_cast<std::ptrdiff_t>(emo.size()), completed.end());
    c.emotions = stats::summarize(a);
    c.points = stats::summarize(b);

    c.normality_p_emotions = normality_p(a);
    c.normality_p_points = normality_p(b);
    c.normal = c.normality_p_emotions && c.normality_p_points && *c.normality_p_emotions >= stats::kAlpha &&
               *c.normality_p_points >= stats::kAlpha;

    if (c.normal) {
        c.test = stats::t_test(a, b, stats::TTestMode::Independent);
    } else {
        c.test = stats::mann_whitney_u(a, b);
    }
    return c;
}

}  // namespace

StudyReport study_report(std::span<const SessionLog> emotions, std::span<const SessionLog> points,
                         const WindowEdges& edges) {
    if (emotions.size() < 2 || points.size() < 2) {
        throw std::invalid_argument("each cohort needs at least two sessions for a between-group test");
    }
    for (const auto& log : emotions) {
        if (log.header.condition != Condition::Emotions) {
            throw std::invalid_argument("session " + log.header.session_id + " is not an emotions session");
        }
    }
    for (const auto& log : points) {
        if (log.header.condition != Condition::Points) {
            throw std::invalid_argument("session " + log.header.session_id + " is not a points session");
        }
    }

    std::vector<SessionLog> all(emotions.begin(), emotions.end());
    all.insert(all.end(), points.begin(), points.end());

    StudyReport report;
    report.metrics = windowed_metrics(all, edges);

    std::vector<const SessionMetrics*> emo, pts;
    for (const auto& s : report.metrics.sessions) {
        (s.condition == Condition::Emotions ? emo : pts).push_back(&s);
    }
    for (const auto& spec : metric_specs(edges)) {
        report.comparisons.push_back(compare(spec, emo, pts));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt_opt(const std::optional<double>& v, const char* spec = "{:.3f}") {
    return v ? fmt::format(fmt::runtime(spec), *v) : std::string("-");
}

std::string fmt_pct(const std::optional<double>& v) { return v ? fmt::format("{:.1f}", 100.0 * *v) : "-"; }

}  // namespace

std::string format_metrics_table(const MetricsReport& report) {
    std::string out;
    out += "Per-session metrics\n";
    out += fmt::format("{:<28} {:<9} {:>7} {:>8} {:>8} {:>7}", "session", "condition", "min", "attempts", "grasps",
                       "acc%");
    for (std::size_t w = 0; w < report.edges.window_count(); ++w) {
        out += fmt::format(" {:>9}", "acc%" + report.edges.label(w));
    }
    for (std::size_t w = 0; w < report.edges.window_count(); ++w) {
        out += fmt::format(" {:>9}", "gpm" + report.edges.label(w));
    }
    out += '\n';
    for (const auto& s : report.sessions) {
        out += fmt::format("{:<28} {:<9} {:>7.1f} {:>8} {:>8} {:>7}", s.session_id, to_string(s.condition),
                           s.duration_min, s.total_game_attempts, s.total_physical_interactions,
                           fmt_pct(s.accuracy_mean));
        for (const auto& w : s.windows) out += fmt::format(" {:>9}", fmt_pct(w.accuracy_mean));
        for (const auto& w : s.windows) out += fmt::format(" {:>9}", fmt_opt(w.games_per_minute, "{:.2f}"));
        out += '\n';
    }

    if (!report.conditions.empty()) {
        out += "\nPer-condition means (SEM)\n";
        for (const auto& c : report.conditions) {
            out += fmt::format("{:<9} n={:<3} acc% {:>5} ({})", to_string(c.condition), c.sessions,
                               fmt_pct(c.accuracy.mean), fmt_pct(c.accuracy.sem));
            for (std::size_t w = 0; w < c.window_accuracy.size(); ++w) {
                out += fmt::format("  [{}] {} ({})", report.edges.label(w), fmt_pct(c.window_accuracy[w].mean),
                                   fmt_pct(c.window_accuracy[w].sem));
            }
            out += '\n';
        }
    }
    return out;
}

std::string format_report_table(const StudyReport& report) {
    std::string out = format_metrics_table(report.metrics);
    out += "\nBetween-condition tests (emotions vs points, alpha = .05)\n";
    out += fmt::format("{:<24} {:>16} {:>16} {:>7} {:<15} {:>9} {:>6} {:>8} {:>8} {:>4}\n", "metric",
                       "emotions M(SD)", "points M(SD)", "normal", "test", "stat", "df", "p", "effect", "sig");
    for (const auto& c : report.comparisons) {
        if (!c.test) {
            out += fmt::format("{:<24} {}\n", c.metric, c.note);
            continue;
        }
        const auto& t = *c.test;
        const std::string effect_name = t.kind == stats::TestKind::MannWhitneyU ? "r=" : "d=";
        out += fmt::format("{:<24} {:>16} {:>16} {:>7} {:<15} {:>9.3f} {:>6} {:>8.4f} {:>8} {:>4}\n", c.metric,
                           fmt::format("{:.2f}({:.2f})", c.emotions.mean, c.emotions.sd),
                           fmt::format("{:.2f}({:.2f})", c.points.mean, c.points.sd), c.normal ? "yes" : "no",
                           std::string(stats::to_string(t.kind)) + (t.exact ? "*" : ""), t.statistic,
                           t.df ? fmt::format("{:g}", *t.df) : std::string("-"), t.p_value,
                           effect_name + fmt_opt(t.effect_size, "{:.3f}"), c.significant() ? "*" : "");
    }
    out += "(* after the test name: exact p-value)\n";
    return out;
}

std::string metrics_to_json(const MetricsReport& report) {
    Json j = Json::object();
    Json edges = Json::array();
    for (double e : report.edges.minutes) edges.push_back(std::isinf(e) ? Json("inf") : Json(e));
    j["window_edges_min"] = edges;

    Json sessions = Json::array();
    for (const auto& s : report.sessions) {
        Json windows = Json::array();
        for (const auto& w : s.windows) {
            windows.push_back(Json{{"start_min", w.start_min},
                                   {"end_min", std::isinf(w.end_min) ? Json("inf") : Json(w.end_min)},
                                   {"covered_min", w.covered_min},
                                   {"attempts", w.attempts},
                                   {"accuracy_mean", opt(w.accuracy_mean)},
                                   {"accuracy_sd", opt(w.accuracy_sd)},
                                   {"games_per_minute", opt(w.games_per_minute)}});
        }
        sessions.push_back(Json{{"session_id", s.session_id},
                                {"condition", std::string(to_string(s.condition))},
                                {"duration_min", s.duration_min},
                                {"total_game_attempts", s.total_game_attempts},
                                {"total_physical_interactions", s.total_physical_interactions},
                                {"touch_frames", s.touch_frames},
                                {"aborted_rounds", s.aborted_rounds},
                                {"engagement_volume", s.engagement_volume()},
                                {"accuracy_mean", opt(s.accuracy_mean)},
                                {"accuracy_sd", opt(s.accuracy_sd)},
                                {"windows", windows}});
    }
    j["sessions"] = sessions;

    Json conditions = Json::array();
    for (const auto& c : report.conditions) {
        Json wacc = Json::array();
        Json wgpm = Json::array();
        for (const auto& w : c.window_accuracy) wacc.push_back(cohort_json(w));
        for (const auto& w : c.window_games_per_minute) wgpm.push_back(cohort_json(w));
        conditions.push_back(Json{{"condition", std::string(to_string(c.condition))},
                                  {"sessions", c.sessions},
                                  {"accuracy", cohort_json(c.accuracy)},
                                  {"game_attempts", cohort_json(c.game_attempts)},
                                  {"physical_interactions", cohort_json(c.physical_interactions)},
                                  {"window_accuracy", wacc},
                                  {"window_games_per_minute", wgpm}});
    }
    j["conditions"] = conditions;
    return j.dump(2);
}

std::string report_to_json(const StudyReport& report) {
    Json j = Json::parse(metrics_to_json(report.metrics), nullptr, true, false);
    Json tests = Json::array();
    for (const auto& c : report.comparisons) {
        Json row{{"metric", c.metric},
                 {"emotions", {{"mean", c.emotions.mean}, {"sd", c.emotions.sd}, {"n", c.emotions.n}}},
                 {"points", {{"mean", c.points.mean}, {"sd", c.points.sd}, {"n", c.points.n}}},
                 {"imputed_emotions", c.imputed_emotions},
                 {"imputed_points", c.imputed_points},
                 {"normality_p_emotions", opt(c.normality_p_emotions)},
                 {"normality_p_points", opt(c.normality_p_points)},
                 {"normal", c.normal}};
        if (c.test) {
            const auto& t = *c.test;
            row["test"] = std::string(stats::to_string(t.kind));
            row["statistic"] = t.statistic;
            row["df"] = opt(t.df);
            row["p_value"] = t.p_value;
            row["effect_size"] = opt(t.effect_size);
            row["effect_kind"] = t.kind == stats::TestKind::MannWhitneyU ? "rank_biserial_r" : "cohens_d";
            row["exact"] = t.exact;
            row["significant"] = c.significant();
        } else {
            row["test"] = nullptr;
            row["note"] = c.note;
        }
        tests.push_back(row);
    }
    j["tests"] = tests;
    return j.dump(2);
}

std::string window_csv(const MetricsReport& report) {
    std::string out = "condition,window,start_min,end_min,sessions_with_attempts,accuracy_mean,accuracy_sem,"
                      "games_per_minute_mean,games_per_minute_sem\n";
    auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.6g}", *v) : std::string(); };
    for (const auto& c : report.conditions) {
        for (std::size_t w = 0; w < report.edges.window_count(); ++w) {
            const auto& acc = c.window_accuracy[w];
            const auto& gpm = c.window_games_per_minute[w];
            out += fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(c.condition), report.edges.label(w),
                               format_edge(report.edges.minutes[w]), format_edge(report.edges.minutes[w + 1]), acc.n,
                               cell(acc.mean), cell(acc.sem), cell(gpm.mean), cell(gpm.sem));
        }
    }
    return out;
}

}  // namespace affecta

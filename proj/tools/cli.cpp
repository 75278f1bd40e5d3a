#include "cli.hpp"

#include "affecta/analytics.hpp"
#include "affecta/session_log.hpp"
#include "affecta/simulator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

namespace affecta::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

class CommandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("affecta", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(spdlog::level::warn);
    if (const char* level = std::getenv("AFFECTA_LOG_LEVEL")) {
        logger->set_level(spdlog::level::from_str(level));
    }
    return logger;
}

EngineParams apply_overrides(const std::vector<std::string>& overrides) {
    EngineParams params;
    for (const auto& group : overrides) {
        std::stringstream ss(group);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw CommandError("--params expects key=value, got '" + item + "'");
            const std::string key = item.substr(0, eq);
            const std::string value = item.substr(eq + 1);
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw CommandError("--params " + key + ": not a number: '" + value + "'");
            }
            set_param(params, key, v);
        }
    }
    params.validate();
    return params;
}

// Writes `content` next to `target` and renames it into place.
void write_atomically(const fs::path& target, const std::string& content) {
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CommandError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw CommandError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw CommandError("cannot move " + tmp.string() + " into place");
    }
}

std::string available_presets() {
    std::string s;
    for (const auto& n : paper_scenario_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
}

// ---------------------------------------------------------------------------
// sim

struct SimArgs {
    std::string scenario;
    std::uint64_t seed = kReferenceSeed;
    std::string out_dir;
    std::vector<std::string> params;
    unsigned threads = 0;
    double duration = 0.0;  // 0: scenario default
};

int cmd_sim(const SimArgs& a, std::ostream& out, spdlog::logger& log) {
    SimulationOptions options;
    options.engine = apply_overrides(a.params);

    Scenario scenario;
    const auto presets = paper_scenario_names();
    if (std::find(presets.begin(), presets.end(), a.scenario) != presets.end()) {
        scenario = paper_scenario(a.scenario, a.seed);
    } else if (fs::is_regular_file(a.scenario)) {
        scenario = load_scenario_file(a.scenario);
        for (auto& p : scenario.cohort) p.seed = splitmix64(a.seed ^ p.seed);
    } else {
        throw CommandError("unknown scenario '" + a.scenario + "' (available presets: " + available_presets() +
                           "; or pass a scenario file)");
    }
    if (a.duration > 0.0) scenario.duration_minutes = a.duration;

    const fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw CommandError("cannot create output directory " + dir.string());

    const unsigned threads = a.threads ? a.threads : std::max(1u, std::thread::hardware_concurrency());
    log.info("simulating {} sessions of {} on {} threads", scenario.cohort.size(), scenario.name, threads);
    const std::vector<SessionLog> logs = run_scenario(scenario, options, threads);

    Json manifest = Json::object();
    manifest["scenario"] = scenario.name;
    manifest["condition"] = std::string(to_string(scenario.condition));
    manifest["seed"] = a.seed;
    manifest["duration_minutes"] = scenario.duration_minutes;
    manifest["params_digest"] = params_digest(options.engine);
    Json sessions = Json::array();
    for (const auto& log_entry : logs) {
        const std::string file = log_entry.header.session_id + ".jsonl";
        write_atomically(dir / file, serialize_log(log_entry));
        sessions.push_back(Json{{"file", file},
                                {"session_id", log_entry.header.session_id},
                                {"seed", log_entry.header.seed},
                                {"records", log_entry.records.size()}});
    }
    manifest["sessions"] = sessions;
    write_atomically(dir / "manifest.json", manifest.dump(2) + "\n");

    out << fmt::format("wrote {} session logs and manifest.json to {}\n", logs.size(), dir.string());
    return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
    std::vector<std::string> inputs;
    std::string windows;
    std::string out_dir = "report";
    std::string format = "table";
};

std::vector<fs::path> collect_logs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.is_regular_file() && entry.path().extension() == ".jsonl") found.push_back(entry.path());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::is_regular_file(p)) {
            files.push_back(p);
        } else {
            throw CommandError("no such log file or directory: " + in);
        }
    }
    if (files.empty()) throw CommandError("no session logs found");
    return files;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, spdlog::logger& log) {
    const WindowEdges edges = a.windows.empty() ? WindowEdges::defaults() : WindowEdges::parse(a.windows);

    std::vector<SessionLog> emotions;
    std::vector<SessionLog> points;
    for (const auto& file : collect_logs(a.inputs)) {
        SessionLog parsed = read_log_file(file);
        log.debug("parsed {} ({} records)", file.string(), parsed.records.size());
        (parsed.header.condition == Condition::Emotions ? emotions : points).push_back(std::move(parsed));
    }

    std::string table;
    std::string summary;
    std::string csv;
    if (emotions.size() >= 2 && points.size() >= 2) {
        const StudyReport report = study_report(emotions, points, edges);
        table = format_report_table(report);
        summary = report_to_json(report);
        csv = window_csv(report.metrics);
    } else {
        std::vector<SessionLog> all = std::move(emotions);
        all.insert(all.end(), std::make_move_iterator(points.begin()), std::make_move_iterator(points.end()));
        const MetricsReport metrics = windowed_metrics(all, edges);
        table = format_metrics_table(metrics) +
                "\nStatistics: not applicable (each condition needs at least two sessions)\n";
        Json j = Json::parse(metrics_to_json(metrics));
        j["tests"] = nullptr;
        summary = j.dump(2);
        csv = window_csv(metrics);
    }

    if (a.format == "csv") {
        out << csv;
    } else {
        out << table;
    }

    const fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw CommandError("cannot create output directory " + dir.string());
    write_atomically(dir / "windows.csv", csv);
    write_atomically(dir / "summary.json", summary + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// trace

struct TraceArgs {
    std::string script;
    double horizon_s = 60.0;
    std::vector<std::string> params;
    std::string out_file;
};

std::vector<TimestampMs> read_trace_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CommandError("cannot open script " + path);
    std::vector<TimestampMs> times;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::istringstream line(hash == std::string::npos ? raw : raw.substr(0, hash));
        std::string time_token;
        if (!(line >> time_token)) continue;
        std::string kind = "interaction";
        line >> kind;
        std::string extra;
        const std::string where = path + ":" + std::to_string(line_no) + ": ";
        if (line >> extra || kind != "interaction") throw CommandError(where + "expected '<t_ms> [interaction]'");
        TimestampMs t = 0;
        try {
            std::size_t used = 0;
            t = std::stoll(time_token, &used);
            if (used != time_token.size() || t < 0) throw std::invalid_argument(time_token);
        } catch (const std::exception&) {
            throw CommandError(where + "bad timestamp '" + time_token + "'");
        }
        if (!times.empty() && t < times.back()) throw CommandError(where + "timestamps out of order");
        times.push_back(t);
    }
    return times;
}

std::string trace_csv(const std::vector<TimestampMs>& interactions, TimestampMs horizon_ms,
                      const EngineParams& params) {
    std::string csv = "t_ms,mood,decay_rate,impact,impact_now,event\n";
    MoodState state = new_state(params, 0);
    auto row = [&](TimestampMs t, const char* event) {
        csv += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", t, state.mood, state.decay_rate, state.impact,
                           impact_at(state, params, t), event);
    };

    std::size_t next = 0;
    for (TimestampMs tick_t = params.tick_interval_ms; tick_t <= horizon_ms; tick_t += params.tick_interval_ms) {
        // An interaction on a tick boundary applies that tick itself and
        // replaces the plain tick row.
        bool ticked = false;
        while (next < interactions.size() && interactions[next] <= tick_t) {
            ticked = ticked || interactions[next] == tick_t;
            state = on_interaction(state, params, interactions[next]);
            row(interactions[next], "interaction");
            ++next;
        }
        if (!ticked) {
            state = tick(state, params, tick_t);
            row(tick_t, "tick");
        }
    }
    return csv;
}

int cmd_trace(const TraceArgs& a, std::ostream& out, spdlog::logger& log) {
    const EngineParams params = apply_overrides(a.params);
    if (!(a.horizon_s > 0.0)) throw CommandError("--horizon-s must be positive");
    const auto horizon_ms = static_cast<TimestampMs>(std::llround(a.horizon_s * 1000.0));
    const std::vector<TimestampMs> interactions = read_trace_script(a.script);
    if (!interactions.empty() && interactions.back() > horizon_ms) {
        throw CommandError("interaction at " + std::to_string(interactions.back()) + " ms lies beyond the horizon");
    }
    log.info("tracing {} interactions over {} ms", interactions.size(), horizon_ms);
    const std::string csv = trace_csv(interactions, horizon_ms, params);
    if (a.out_file.empty()) {
        out << csv;
    } else {
        write_atomically(a.out_file, csv);
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    auto logger = make_logger(err);

    CLI::App app{"affecta: mood-model engagement simulation and analysis"};
    app.require_subcommand(1);

    SimArgs sim;
    auto* sim_cmd = app.add_subcommand("sim", "simulate a cohort and write one session log per member");
    sim_cmd->add_option("--scenario", sim.scenario, "preset name or scenario file")->required();
    sim_cmd->add_option("--seed", sim.seed, "random seed")->capture_default_str();
    sim_cmd->add_option("-o,--out", sim.out_dir, "output directory")->required();
    sim_cmd->add_option("--params", sim.params, "engine overrides key=value[,key=value]");
    sim_cmd->add_option("--threads", sim.threads, "worker threads (default: all cores)");
    sim_cmd->add_option("--duration", sim.duration, "session length in simulated minutes");

    AnalyzeArgs analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "compute metrics and between-condition tests");
    analyze_cmd->add_option("inputs", analyze.inputs, "session log files or directories")->required();
    analyze_cmd->add_option("--windows", analyze.windows, "window edges in minutes, e.g. 0,5,10,20");
    analyze_cmd->add_option("-o,--out", analyze.out_dir, "directory for summary.json and windows.csv")
        ->capture_default_str();
    analyze_cmd->add_option("--format", analyze.format, "stdout format")
        ->check(CLI::IsMember({"table", "csv"}))
        ->capture_default_str();

    TraceArgs trace;
    auto* trace_cmd = app.add_subcommand("trace", "replay an interaction script through the mood model");
    trace_cmd->add_option("--script", trace.script, "file with one '<t_ms> [interaction]' per line")->required();
    trace_cmd->add_option("--horizon-s", trace.horizon_s, "trace length in seconds")->capture_default_str();
    trace_cmd->add_option("--params", trace.params, "engine overrides key=value[,key=value]");
    trace_cmd->add_option("-o,--out", trace.out_file, "write CSV here instead of stdout");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& s : args) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*sim_cmd) return cmd_sim(sim, out, *logger);
        if (*analyze_cmd) return cmd_analyze(analyze, out, *logger);
        if (*trace_cmd) return cmd_trace(trace, out, *logger);
    } catch (const LogFormatError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace affecta::cli

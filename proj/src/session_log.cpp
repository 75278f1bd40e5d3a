#include "affecta/session_log.hpp"

#include "affecta/digest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace affecta {

using Json = nlohmann::ordered_json;

namespace {

// Order of the parameter table in headers and digests. Never reorder.
constexpr std::array<std::string_view, 14> kParamKeys = {
    "mood_init",        "decay_init",         "impact_init",       "tick_interval_ms",     "decay_increment",
    "decay_cap",        "impact_growth_per_s", "impact_plateau_s", "impact_plateau_bonus", "mood_gain_factor",
    "decay_damp_factor", "impact_damp_factor", "mood_min",         "mood_max"};

double param_value(const EngineParams& p, std::string_view key) {
    if (key == "mood_init") return p.mood_init;
    if (key == "decay_init") return p.decay_init;
    if (key == "impact_init") return p.impact_init;
    if (key == "tick_interval_ms") return static_cast<double>(p.tick_interval_ms);
    if (key == "decay_increment") return p.decay_increment;
    if (key == "decay_cap") return p.decay_cap;
    if (key == "impact_growth_per_s") return p.impact_growth_per_s;
    if (key == "impact_plateau_s") return p.impact_plateau_s;
    if (key == "impact_plateau_bonus") return p.impact_plateau_bonus;
    if (key == "mood_gain_factor") return p.mood_gain_factor;
    if (key == "decay_damp_factor") return p.decay_damp_factor;
    if (key == "impact_damp_factor") return p.impact_damp_factor;
    if (key == "mood_min") return p.mood_min;
    if (key == "mood_max") return p.mood_max;
    return 0.0;
}

constexpr std::size_t kParamCount = kParamKeys.size();

Json params_to_json(const EngineParams& p) {
    Json j = Json::object();
    for (std::size_t i = 0; i < kParamCount; ++i) {
        const std::string key(kParamKeys[i]);
        if (key == "tick_interval_ms") {
            j[key] = p.tick_interval_ms;
        } else {
            j[key] = param_value(p, key);
        }
    }
    return j;
}

// Thrown internally by the field readers; converted to LogIssue with a line.
struct SchemaViolation {
    std::string message;
};

[[noreturn]] void violation(std::string message) { throw SchemaViolation{std::move(message)}; }

void require_keys(const Json& obj, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            violation("unknown field '" + key + "'");
        }
    }
    for (auto key : allowed) {
        if (!obj.contains(std::string(key))) {
            violation("missing field '" + std::string(key) + "'");
        }
    }
}

std::int64_t get_int(const Json& obj, const char* key) {
    const Json& v = obj.at(key);
    if (!v.is_number_integer()) violation(std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::uint64_t get_uint(const Json& obj, const char* key) {
    const Json& v = obj.at(key);
    if (!v.is_number_unsigned()) violation(std::string("field '") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

double get_double(const Json& obj, const char* key) {
    const Json& v = obj.at(key);
    if (!v.is_number()) violation(std::string("field '") + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) violation(std::string("field '") + key + "' must be finite");
    return d;
}

std::string get_string(const Json& obj, const char* key) {
    const Json& v = obj.at(key);
    if (!v.is_string()) violation(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

bool get_bool(const Json& v, const char* key) {
    if (!v.is_boolean()) violation(std::string("field '") + key + "' must hold booleans");
    return v.get<bool>();
}

const Json& get_array(const Json& obj, const char* key) {
    const Json& v = obj.at(key);
    if (!v.is_array()) violation(std::string("field '") + key + "' must be an array");
    return v;
}

EngineParams params_from_json(const Json& j) {
    if (!j.is_object()) violation("field 'params' must be an object");
    EngineParams p;
    std::size_t seen = 0;
    for (const auto& [key, value] : j.items()) {
        const auto it = std::find(kParamKeys.begin(), kParamKeys.begin() + kParamCount, key);
        if (it == kParamKeys.begin() + kParamCount) violation("unknown engine parameter '" + key + "'");
        if (key == "tick_interval_ms") {
            if (!value.is_number_integer()) violation("params.tick_interval_ms must be an integer");
        } else if (!value.is_number()) {
            violation("params." + key + " must be a number");
        }
        set_param(p, key, value.get<double>());
        ++seen;
    }
    if (seen != kParamCount) violation("params must list all " + std::to_string(kParamCount) + " engine parameters");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        violation(std::string("invalid engine parameters: ") + e.what());
    }
    return p;
}

LogHeader header_from_json(const Json& j) {
    if (!j.is_object()) violation("header must be an object");
    require_keys(j, {"type", "schema", "session_id", "scenario", "condition", "seed", "duration_ms", "params",
                     "params_digest"});
    if (get_string(j, "type") != "header") violation("first line must be the header");
    if (get_string(j, "schema") != kLogSchema) violation("unsupported schema '" + get_string(j, "schema") + "'");
    LogHeader h;
    h.session_id = get_string(j, "session_id");
    h.scenario = get_string(j, "scenario");
    try {
        h.condition = parse_condition(get_string(j, "condition"));
    } catch (const std::invalid_argument& e) {
        violation(e.what());
    }
    h.seed = get_uint(j, "seed");
    h.duration_ms = get_int(j, "duration_ms");
    if (h.duration_ms < 0) violation("duration_ms must be non-negative");
    h.params = params_from_json(j.at("params"));
    h.params_digest = get_string(j, "params_digest");
    if (h.params_digest != params_digest(h.params)) violation("params_digest does not match params");
    return h;
}

template <std::size_t N, class T, class Read>
std::array<T, N> read_fixed(const Json& arr, const char* key, Read read) {
    if (arr.size() != N) violation(std::string("field '") + key + "' must have " + std::to_string(N) + " entries");
    std::array<T, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = read(arr[i]);
    return out;
}

std::int64_t as_int(const Json& v) {
    if (!v.is_number_integer()) violation("expected integer entries");
    return v.get<std::int64_t>();
}

LogRecord record_from_json(const Json& j) {
    if (!j.is_object()) violation("record must be an object");
    if (!j.contains("type")) violation("missing field 'type'");
    const std::string type = get_string(j, "type");
    if (!j.contains("t")) violation("missing field 't'");
    LogRecord r;
    r.t_ms = get_int(j, "t");

    if (type == "touch") {
        require_keys(j, {"t", "type", "frame"});
        try {
            r.body = rec::Touch{TouchFrame::from_bits(get_string(j, "frame"))};
        } catch (const std::invalid_argument& e) {
            violation(e.what());
        }
    } else if (type == "grasp") {
        require_keys(j, {"t", "type"});
        r.body = rec::Grasp{};
    } else if (type == "release") {
        require_keys(j, {"t", "type"});
        r.body = rec::Release{};
    } else if (type == "squeeze") {
        require_keys(j, {"t", "type"});
        r.body = rec::Squeeze{};
    } else if (type == "vibration") {
        require_keys(j, {"t", "type", "at", "duration_ms", "note"});
        r.body = rec::Vibration{get_int(j, "at"), get_int(j, "duration_ms"), static_cast<int>(get_int(j, "note"))};
    } else if (type == "star") {
        require_keys(j, {"t", "type", "at", "note"});
        r.body = rec::Star{get_int(j, "at"), static_cast<int>(get_int(j, "note"))};
    } else if (type == "attempt_scored") {
        require_keys(j, {"t", "type", "onsets", "note_duration_ms", "squeezes", "matched", "accuracy"});
        rec::AttemptScored a;
        a.onsets_ms = read_fixed<kNotesPerPattern, std::int64_t>(get_array(j, "onsets"), "onsets", as_int);
        a.note_duration_ms = get_int(j, "note_duration_ms");
        for (const auto& v : get_array(j, "squeezes")) a.squeezes_ms.push_back(as_int(v));
        a.matched = read_fixed<kNotesPerPattern, bool>(get_array(j, "matched"), "matched",
                                                       [](const Json& v) { return get_bool(v, "matched"); });
        a.accuracy = get_double(j, "accuracy");
        r.body = std::move(a);
    } else if (type == "round_aborted") {
        require_keys(j, {"t", "type", "reason"});
        r.body = rec::RoundAborted{get_string(j, "reason")};
    } else if (type == "feedback") {
        const std::string kind = j.contains("kind") ? get_string(j, "kind") : std::string();
        if (kind == "face") {
            require_keys(j, {"t", "type", "kind", "mood", "eyebrow_angle_deg", "eye_curvature"});
            r.body = rec::Face{get_double(j, "mood"), get_double(j, "eyebrow_angle_deg"), get_double(j, "eye_curvature")};
        } else if (kind == "coin") {
            require_keys(j, {"t", "type", "kind", "points", "total_points"});
            r.body = rec::Coin{get_int(j, "points"), get_int(j, "total_points")};
        } else {
            violation("feedback kind must be 'face' or 'coin'");
        }
    } else if (type == "tick_snapshot") {
        require_keys(j, {"t", "type", "mood", "decay_rate", "impact"});
        r.body = rec::TickSnapshot{get_double(j, "mood"), get_double(j, "decay_rate"), get_double(j, "impact")};
    } else if (type == "session_end") {
        require_keys(j, {"t", "type"});
        r.body = rec::SessionEnd{};
    } else {
        violation("unknown record type '" + type + "'");
    }
    return r;
}

Json record_to_json(const LogRecord& r) {
    Json j = Json::object();
    j["t"] = r.t_ms;
    j["type"] = std::string(record_type(r.body));
    std::visit(
        [&j](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, rec::Touch>) {
                j["frame"] = b.frame.bits();
            } else if constexpr (std::is_same_v<T, rec::Vibration>) {
                j["at"] = b.at_ms;
                j["duration_ms"] = b.duration_ms;
                j["note"] = b.note;
            } else if constexpr (std::is_same_v<T, rec::Star>) {
                j["at"] = b.at_ms;
                j["note"] = b.note;
            } else if constexpr (std::is_same_v<T, rec::AttemptScored>) {
                j["onsets"] = b.onsets_ms;
                j["note_duration_ms"] = b.note_duration_ms;
                j["squeezes"] = b.squeezes_ms;
                j["matched"] = b.matched;
                j["accuracy"] = b.accuracy;
            } else if constexpr (std::is_same_v<T, rec::RoundAborted>) {
                j["reason"] = b.reason;
            } else if constexpr (std::is_same_v<T, rec::Face>) {
                j["kind"] = "face";
                j["mood"] = b.mood;
                j["eyebrow_angle_deg"] = b.eyebrow_angle_deg;
                j["eye_curvature"] = b.eye_curvature;
            } else if constexpr (std::is_same_v<T, rec::Coin>) {
                j["kind"] = "coin";
                j["points"] = b.points;
                j["total_points"] = b.total_points;
            } else if constexpr (std::is_same_v<T, rec::TickSnapshot>) {
                j["mood"] = b.mood;
                j["decay_rate"] = b.decay_rate;
                j["impact"] = b.impact;
            }
        },
        r.body);
    return j;
}

// Tracks grasp episodes and round lifecycles across records.
class LifecycleChecker {
public:
    std::optional<std::string> accept(const LogRecord& r) {
        if (r.t_ms < 0) return "negative timestamp";
        if (r.t_ms < last_t_) {
            return "timestamp regression: " + std::to_string(r.t_ms) + " after " + std::to_string(last_t_);
        }
        if (ended_) return "record after session_end";
        last_t_ = r.t_ms;

        return std::visit(
            [this](const auto& b) -> std::optional<std::string> {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, rec::Grasp>) {
                    if (grasped_) return "grasp while already grasped";
                    grasped_ = true;
                    round_open_ = true;
                    abortable_ = true;
                    vibrations_ = 0;
                } else if constexpr (std::is_same_v<T, rec::Release>) {
                    if (!grasped_) return "release without grasp";
                    grasped_ = false;
                    round_open_ = false;
                } else if constexpr (std::is_same_v<T, rec::Squeeze>) {
                    if (!grasped_) return "squeeze outside a grasp";
                } else if constexpr (std::is_same_v<T, rec::Vibration>) {
                    if (!round_open_) return "vibration outside a round";
                    if (b.note != vibrations_ || vibrations_ >= static_cast<int>(kNotesPerPattern)) {
                        return "vibration note out of sequence";
                    }
                    if (b.duration_ms <= 0) return "vibration duration must be positive";
                    ++vibrations_;
                } else if constexpr (std::is_same_v<T, rec::Star>) {
                    if (!round_open_) return "star outside a round";
                } else if constexpr (std::is_same_v<T, rec::AttemptScored>) {
                    if (!round_open_ || vibrations_ != static_cast<int>(kNotesPerPattern)) {
                        return "orphan attempt_scored (no matching round lifecycle)";
                    }
                    const auto matched = std::count(b.matched.begin(), b.matched.end(), true);
                    if (std::abs(b.accuracy - matched / static_cast<double>(kNotesPerPattern)) > 1e-12) {
                        return "accuracy does not equal matched/3";
                    }
                    round_open_ = false;
                    abortable_ = false;
                } else if constexpr (std::is_same_v<T, rec::RoundAborted>) {
                    if (!abortable_) return "round_aborted without an open round";
                    abortable_ = false;
                    round_open_ = false;
                } else if constexpr (std::is_same_v<T, rec::Coin>) {
                    if (b.points <= 0) return "coin award must be positive";
                } else if constexpr (std::is_same_v<T, rec::SessionEnd>) {
                    ended_ = true;
                }
                return std::nullopt;
            },
            r.body);
    }

private:
    TimestampMs last_t_ = 0;
    bool ended_ = false;
    bool grasped_ = false;
    bool round_open_ = false;
    bool abortable_ = false;
    int vibrations_ = 0;
};

}  // namespace

std::string params_digest(const EngineParams& params) {
    Fnv1a h;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        h.add_bytes(kParamKeys[i]);
        h.add(param_value(params, kParamKeys[i]));
    }
    return h.hex();
}

std::string_view record_type(const RecordBody& body) {
    static constexpr std::array<std::string_view, std::variant_size_v<RecordBody>> kNames = {
        "touch", "grasp", "release", "squeeze", "vibration", "star", "attempt_scored", "round_aborted",
        "feedback", "feedback", "tick_snapshot", "session_end"};
    return kNames[body.index()];
}

TimestampMs SessionLog::elapsed_ms() const {
    if (!records.empty() && std::holds_alternative<rec::SessionEnd>(records.back().body)) {
        return records.back().t_ms;
    }
    const TimestampMs last = records.empty() ? 0 : records.back().t_ms;
    return std::max(header.duration_ms, last);
}

LogFormatError::LogFormatError(std::string source, LogIssue issue)
    : std::runtime_error(source + ":" + std::to_string(issue.line) + ": " + issue.message),
      source_(std::move(source)),
      issue_(std::move(issue)) {}

ParseOutcome parse_log(std::string_view text) {
    ParseOutcome out;
    LifecycleChecker checker;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    if (text.empty()) {
        out.error = LogIssue{1, "missing header"};
        return out;
    }

    while (pos < text.size()) {
        ++line_no;
        const std::size_t nl = text.find('\n', pos);
        const bool terminated = nl != std::string_view::npos;
        const std::string_view line = text.substr(pos, terminated ? nl - pos : std::string_view::npos);
        pos = terminated ? nl + 1 : text.size();

        if (!terminated) {
            out.error = LogIssue{line_no, "unterminated record"};
            return out;
        }
        if (line.empty()) {
            out.error = LogIssue{line_no, "empty record"};
            return out;
        }

        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            out.error = LogIssue{line_no, std::string("malformed JSON: ") + e.what()};
            return out;
        }

        try {
            if (line_no == 1) {
                out.log.header = header_from_json(j);
                continue;
            }
            LogRecord r = record_from_json(j);
            if (auto problem = checker.accept(r)) {
                out.error = LogIssue{line_no, *problem};
                return out;
            }
            out.log.records.push_back(std::move(r));
        } catch (const SchemaViolation& v) {
            out.error = LogIssue{line_no, v.message};
            return out;
        } catch (const Json::exception& e) {
            out.error = LogIssue{line_no, e.what()};
            return out;
        }
    }
    return out;
}

SessionLog parse_log_strict(std::string_view text, const std::string& source) {
    ParseOutcome out = parse_log(text);
    if (out.error) throw LogFormatError(source, *out.error);
    return std::move(out.log);
}

SessionLog read_log_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LogFormatError(path.string(), LogIssue{0, "cannot open file"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_log_strict(ss.str(), path.string());
}

std::string serialize_header(const LogHeader& h) {
    Json j = Json::object();
    j["type"] = "header";
    j["schema"] = std::string(kLogSchema);
    j["session_id"] = h.session_id;
    j["scenario"] = h.scenario;
    j["condition"] = std::string(to_string(h.condition));
    j["seed"] = h.seed;
    j["duration_ms"] = h.duration_ms;
    j["params"] = params_to_json(h.params);
    j["params_digest"] = h.params_digest;
    return j.dump();
}

std::string serialize_record(const LogRecord& record) { return record_to_json(record).dump(); }

std::string serialize_log(const SessionLog& log) {
    std::string out = serialize_header(log.header);
    out.push_back('\n');
    for (const auto& r : log.records) {
        out += serialize_record(r);
        out.push_back('\n');
    }
    return out;
}

std::optional<LogIssue> validate_log(const SessionLog& log) {
    if (log.header.params_digest != params_digest(log.header.params)) {
        return LogIssue{1, "params_digest does not match params"};
    }
    LifecycleChecker checker;
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        if (auto problem = checker.accept(log.records[i])) {
            return LogIssue{i + 2, *problem};
        }
    }
    return std::nullopt;
}

LogWriter::LogWriter(LogHeader header) {
    header.params_digest = params_digest(header.params);
    log_.header = std::move(header);
}

void LogWriter::append(TimestampMs t_ms, RecordBody body) {
    if (t_ms < last_t_) {
        throw TimeRegressionError("log record at " + std::to_string(t_ms) + " precedes " + std::to_string(last_t_));
    }
    last_t_ = t_ms;
    log_.records.push_back(LogRecord{t_ms, std::move(body)});
}

SessionLog LogWriter::finish(TimestampMs end_ms) && {
    append(std::max(end_ms, last_t_), rec::SessionEnd{});
    return std::move(log_);
}

}  // namespace affecta

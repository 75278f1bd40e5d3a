#pragma once

// Append-only session event log, stored as JSON Lines: a header object on the
// first line, then one timestamped record per line. Field names and enum
// spellings are frozen in docs/session_log_schema.md.

#include "affecta/affect.hpp"
#include "affecta/engagement.hpp"
#include "affecta/game.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace affecta {

inline constexpr std::string_view kLogSchema = "affecta.sessionlog/1";

/// Digest of every engine parameter, in a fixed field order.
std::string params_digest(const EngineParams& params);

struct LogHeader {
    std::string session_id;
    std::string scenario;
    Condition condition = Condition::Emotions;
    std::uint64_t seed = 0;
    std::int64_t duration_ms = 0;
    EngineParams params;
    std::string params_digest;  // must equal affecta::params_digest(params)

    bool operator==(const LogHeader&) const = default;
};

namespace rec {

struct Touch {
    TouchFrame frame;
    bool operator==(const Touch&) const = default;
};
struct Grasp {
    bool operator==(const Grasp&) const = default;
};
struct Release {
    bool operator==(const Release&) const = default;
};
struct Squeeze {
    bool operator==(const Squeeze&) const = default;
};
struct Vibration {
    TimestampMs at_ms = 0;
    std::int64_t duration_ms = 0;
    int note = 0;
    bool operator==(const Vibration&) const = default;
};
struct Star {
    TimestampMs at_ms = 0;
    int note = 0;
    bool operator==(const Star&) const = default;
};
struct AttemptScored {
    std::array<std::int64_t, kNotesPerPattern> onsets_ms{};
    std::int64_t note_duration_ms = 0;
    std::vector<std::int64_t> squeezes_ms;
    std::array<bool, kNotesPerPattern> matched{};
    double accuracy = 0.0;
    bool operator==(const AttemptScored&) const = default;
};
struct RoundAborted {
    std::string reason;
    bool operator==(const RoundAborted&) const = default;
};
struct Face {
    double mood = 0.0;
    double eyebrow_angle_deg = 0.0;
    double eye_curvature = 0.0;
    bool operator==(const Face&) const = default;
};
struct Coin {
    std::int64_t points = 0;
    std::int64_t total_points = 0;
    bool operator==(const Coin&) const = default;
};
struct TickSnapshot {
    double mood = 0.0;
    double decay_rate = 0.0;
    double impact = 0.0;
    bool operator==(const TickSnapshot&) const = default;
};
struct SessionEnd {
    bool operator==(const SessionEnd&) const = default;
};

}  // namespace rec

using RecordBody = std::variant<rec::Touch, rec::Grasp, rec::Release, rec::Squeeze, rec::Vibration, rec::Star,
                                rec::AttemptScored, rec::RoundAborted, rec::Face, rec::Coin, rec::TickSnapshot,
                                rec::SessionEnd>;

struct LogRecord {
    TimestampMs t_ms = 0;
    RecordBody body;

    bool operator==(const LogRecord&) const = default;
};

/// The "type" spelling written for a record body.
std::string_view record_type(const RecordBody& body);

struct SessionLog {
    LogHeader header;
    std::vector<LogRecord> records;

    /// Session length: the session_end record if present, else the larger of
    /// the header duration and the last record timestamp.
    TimestampMs elapsed_ms() const;

    bool operator==(const SessionLog&) const = default;
};

struct LogIssue {
    std::size_t line = 0;  // 1-based; the header is line 1
    std::string message;
};

/// Result of parsing: `log` always holds the valid prefix read before the
/// first problem, `error` names that problem.
struct ParseOutcome {
    SessionLog log;
    std::optional<LogIssue> error;

    bool ok() const { return !error.has_value(); }
};

class LogFormatError : public std::runtime_error {
public:
    LogFormatError(std::string source, LogIssue issue);
    const LogIssue& issue() const { return issue_; }
    const std::string& source() const { return source_; }

private:
    std::string source_;
    LogIssue issue_;
};

ParseOutcome parse_log(std::string_view text);

/// Strict variants: throw LogFormatError on the first problem.
SessionLog parse_log_strict(std::string_view text, const std::string& source = "<memory>");
SessionLog read_log_file(const std::filesystem::path& path);

std::string serialize_log(const SessionLog& log);
std::string serialize_record(const LogRecord& record);
std::string serialize_header(const LogHeader& header);

/// Checks every whole-log invariant (timestamps, lifecycle, header digest).
/// Returns the first violation, if any.
std::optional<LogIssue> validate_log(const SessionLog& log);

/// Builder used by producers; keeps records time-ordered.
class LogWriter {
public:
    explicit LogWriter(LogHeader header);

    void append(TimestampMs t_ms, RecordBody body);
    TimestampMs last_timestamp() const { return last_t_; }
    SessionLog finish(TimestampMs end_ms) &&;

private:
    SessionLog log_;
    TimestampMs last_t_ = 0;
};

}  // namespace affecta

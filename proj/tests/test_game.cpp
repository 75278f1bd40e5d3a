#include "affecta/game.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <vector>

using namespace affecta;

namespace {

// Maximum number of notes that can be paired with distinct squeezes inside
// the tolerance, by exhaustive search over assignments.
int best_assignment(const std::vector<std::int64_t>& onsets, const std::vector<std::int64_t>& squeezes,
                    std::int64_t tol, std::size_t note = 0, std::vector<bool>* used = nullptr) {
    std::vector<bool> local(squeezes.size(), false);
    if (!used) used = &local;
    if (note == onsets.size()) return 0;
    int best = best_assignment(onsets, squeezes, tol, note + 1, used);  // leave note unmatched
    for (std::size_t j = 0; j < squeezes.size(); ++j) {
        if ((*used)[j] || std::llabs(squeezes[j] - onsets[note]) > tol) continue;
        (*used)[j] = true;
        best = std::max(best, 1 + best_assignment(onsets, squeezes, tol, note + 1, used));
        (*used)[j] = false;
    }
    return best;
}

RhythmPattern pattern_of(std::int64_t a, std::int64_t b, std::int64_t c) {
    RhythmPattern p;
    p.note_onsets_ms = {a, b, c};
    return p;
}

template <class T>
int count_of(const std::vector<RoundOutput>& out) {
    return static_cast<int>(std::count_if(out.begin(), out.end(), [](const auto& o) { return std::holds_alternative<T>(o); }));
}

}  // namespace

TEST_CASE("grasp detection") {
    CHECK(grasp_detected(TouchFrame::from_bits("11000")));
    CHECK_FALSE(grasp_detected(TouchFrame::from_bits("00100")));
    CHECK(grasp_detected(TouchFrame::from_bits("11111")));
    CHECK_FALSE(grasp_detected(TouchFrame::from_bits("00011")));
    CHECK(grasp_detected(TouchFrame::from_bits("10100")));
    CHECK_FALSE(grasp_detected(TouchFrame::from_bits("10000")));
    CHECK(TouchFrame::from_bits("10110").bits() == "10110");
    CHECK_THROWS(TouchFrame::from_bits("1011"));
    CHECK_THROWS(TouchFrame::from_bits("10x10"));
}

TEST_CASE("touch tracker gestures") {
    TouchTracker t;
    CHECK_FALSE(t.update(TouchFrame::from_bits("00100")).has_value());
    CHECK(t.update(TouchFrame::from_bits("11000")) == GestureKind::Grasp);
    CHECK(t.update(TouchFrame::from_bits("11100")) == GestureKind::Squeeze);
    CHECK_FALSE(t.update(TouchFrame::from_bits("11000")).has_value());
    CHECK(t.update(TouchFrame::from_bits("00000")) == GestureKind::Release);
    CHECK_FALSE(t.grasped());
}

TEST_CASE("pattern generation") {
    Rng a(123), b(123);
    CHECK(generate_pattern(a) == generate_pattern(b));

    Rng rng(99);
    std::int64_t lo = 1 << 30, hi = 0;
    for (int i = 0; i < 10'000; ++i) {
        const RhythmPattern p = generate_pattern(rng);
        CHECK(p.note_onsets_ms[0] == 500);
        for (std::size_t k = 1; k < kNotesPerPattern; ++k) {
            const std::int64_t gap = p.note_onsets_ms[k] - p.note_onsets_ms[k - 1];
            REQUIRE(gap >= 400);
            REQUIRE(gap <= 1200);
            lo = std::min(lo, gap);
            hi = std::max(hi, gap);
        }
    }
    // Both ends of the range are reachable.
    CHECK(lo < 420);
    CHECK(hi > 1180);

    PatternConfig bad;
    bad.min_gap_ms = 1300;
    CHECK_THROWS_AS(generate_pattern(rng, bad), std::invalid_argument);
}

TEST_CASE("scoring examples") {
    const RhythmPattern p = pattern_of(0, 500, 1000);
    const std::vector<std::int64_t> near{10, 490, 1010};
    CHECK(score_attempt(p, near, 250).accuracy == 1.0);
    CHECK(score_attempt(p, {}, 250).accuracy == 0.0);
    const std::vector<std::int64_t> off{260, 740, 1260};
    // 740 sits 240 ms after the second onset, so exactly one note can match.
    const GameAttempt miss = score_attempt(p, off, 250);
    CHECK(best_assignment({0, 500, 1000}, off, 250) == 1);
    CHECK(miss.matched_count() == 1);
    CHECK(miss.accuracy == doctest::Approx(1.0 / 3.0));
    const std::vector<std::int64_t> far{1260, 1400, 1600};
    CHECK(score_attempt(p, far, 250).accuracy == 0.0);
    CHECK(best_assignment({0, 500, 1000}, far, 250) == 0);

    const std::vector<std::int64_t> two{0, 1000};
    const GameAttempt partial = score_attempt(p, two, 150);
    CHECK(partial.matched_count() == 2);
    CHECK(partial.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(partial.per_note_matched == std::array<bool, 3>{true, false, true});

    const std::vector<std::int64_t> unsorted{500, 0};
    CHECK_THROWS(score_attempt(p, unsorted, 150));
    CHECK_THROWS(score_attempt(p, near, 0));
}

TEST_CASE("greedy matcher agrees with exhaustive assignment") {
    Rng rng(2024);
    for (int trial = 0; trial < 2000; ++trial) {
        const RhythmPattern p = generate_pattern(rng);
        const auto n = rng.uniform_int(0, 6);
        std::vector<std::int64_t> s;
        for (std::int64_t i = 0; i < n; ++i) s.push_back(rng.uniform_int(0, p.note_onsets_ms.back() + 600));
        std::sort(s.begin(), s.end());
        const std::vector<std::int64_t> onsets(p.note_onsets_ms.begin(), p.note_onsets_ms.end());
        REQUIRE(score_attempt(p, s).matched_count() == best_assignment(onsets, s, kDefaultToleranceMs));
    }
}

TEST_CASE("round state machine") {
    RoundConfig cfg;

    SUBCASE("grasp starts prompting with three vibrations") {
        RhythmRound r(cfg, 1);
        const auto out = r.step(RoundEventKind::Grasp, 1000);
        CHECK(r.phase() == RoundPhase::Prompting);
        CHECK(count_of<VibrationCommand>(out) == 3);
        CHECK(count_of<StarVisualization>(out) == 0);
        const auto& v = std::get<VibrationCommand>(out[0]);
        CHECK(v.at_ms == 1000 + r.pattern()->note_onsets_ms[0]);
    }

    SUBCASE("tutorial rounds also show stars") {
        cfg.tutorial = true;
        RhythmRound r(cfg, 1);
        CHECK(count_of<StarVisualization>(r.step(RoundEventKind::Grasp, 0)) == 3);
    }

    SUBCASE("release while listening aborts without an attempt") {
        RhythmRound r(cfg, 5);
        r.step(RoundEventKind::Grasp, 0);
        const TimestampMs listen = *r.next_deadline();
        r.step(RoundEventKind::Timer, listen);
        CHECK(r.phase() == RoundPhase::Listening);
        const auto out = r.step(RoundEventKind::Release, listen + 100);
        CHECK(count_of<RoundAborted>(out) == 1);
        CHECK(count_of<AttemptScored>(out) == 0);
        CHECK(r.phase() == RoundPhase::Idle);
    }

    SUBCASE("release while prompting aborts too") {
        RhythmRound r(cfg, 5);
        r.step(RoundEventKind::Grasp, 0);
        CHECK(count_of<RoundAborted>(r.step(RoundEventKind::Release, 10)) == 1);
    }

    SUBCASE("happy path scores 1.0") {
        RhythmRound r(cfg, 11);
        const TimestampMs g = 2000;
        r.step(RoundEventKind::Grasp, g);
        const RhythmPattern pat = *r.pattern();
        const TimestampMs response = g + pat.note_onsets_ms.back() + pat.note_duration_ms;
        CHECK(r.next_deadline() == response);

        auto out = r.step(RoundEventKind::Squeeze, response - 1);
        CHECK(count_of<EventIgnored>(out) == 1);  // still prompting
        for (auto onset : pat.note_onsets_ms) {
            out = r.step(RoundEventKind::Squeeze, response + onset + 20);
            CHECK(count_of<EventIgnored>(out) == 0);
        }
        CHECK(r.response_start_ms() == response);
        CHECK(r.next_deadline() == response + pat.note_onsets_ms.back() + 2000);
        out = r.step(RoundEventKind::Timer, *r.next_deadline());
        REQUIRE(count_of<AttemptScored>(out) == 1);
        CHECK(std::get<AttemptScored>(out.back()).attempt.accuracy == 1.0);
        CHECK(r.phase() == RoundPhase::Scored);
        r.step(RoundEventKind::Timer, response + 10'000);
        CHECK(r.phase() == RoundPhase::Idle);
    }

    SUBCASE("grasp while busy is ignored and time cannot go back") {
        RhythmRound r(cfg, 3);
        r.step(RoundEventKind::Grasp, 100);
        CHECK(count_of<EventIgnored>(r.step(RoundEventKind::Grasp, 200)) == 1);
        CHECK_THROWS_AS(r.step(RoundEventKind::Timer, 150), TimeRegressionError);
    }
}

#include "affecta/engagement.hpp"

#include <doctest.h>

#include <algorithm>

using namespace affecta;

namespace {

GameAttempt attempt_with(double accuracy) {
    GameAttempt a;
    a.accuracy = accuracy;
    return a;
}

StrategyConfig strategy(Condition c) {
    StrategyConfig s;
    s.kind = c;
    return s;
}

}  // namespace

TEST_CASE("condition names") {
    CHECK(parse_condition("emotions") == Condition::Emotions);
    CHECK(parse_condition("points") == Condition::Points);
    CHECK(to_string(Condition::Points) == "points");
    CHECK_THROWS_AS(parse_condition("Points!"), std::invalid_argument);
}

TEST_CASE("points strategy") {
    const EngineParams p;
    const StrategyConfig s = strategy(Condition::Points);
    SessionStart start = start_session(s, p, 0);
    CHECK(start.state.mood.mood == 100.0);
    CHECK(std::get<FaceUpdate>(start.initial_face.payload).face == face_for_mood(100.0));

    EngagementState st = start.state;
    const ScoredOutcome first = on_game_scored(s, p, attempt_with(0.0), st, 5000);
    const auto& coin = std::get<CoinAward>(first.event.payload);
    CHECK(coin.points == 1000);
    CHECK(coin.spin_animation);
    CHECK(first.state.ledger.total_points == 1000);

    st = first.state;
    for (int i = 2; i <= 7; ++i) {
        st = on_game_scored(s, p, attempt_with(1.0), st, 5000 * i).state;
    }
    CHECK(st.ledger.total_points == 7000);
    CHECK(st.ledger.award_count == 7);
    CHECK(st.mood.mood == 100.0);

    const HeartbeatOutcome hb = idle_heartbeat(s, p, st, 3'600'000);
    CHECK_FALSE(hb.event.has_value());
    CHECK(hb.state.mood.mood == 100.0);
}

TEST_CASE("emotions strategy reacts to completed games") {
    const EngineParams p;
    const StrategyConfig s = strategy(Condition::Emotions);
    const EngagementState st = start_session(s, p, 0).state;

    const ScoredOutcome good = on_game_scored(s, p, attempt_with(1.0), st, 1000);
    CHECK(good.positive_interaction);
    const auto& face = std::get<FaceUpdate>(good.event.payload);
    // One decay step (49.9899) then the 37.5 gain.
    CHECK(face.mood == doctest::Approx(87.4899).epsilon(1e-13));
    CHECK(face.face == face_for_mood(face.mood));
    CHECK(face.mood == doctest::Approx(87.5).epsilon(1e-3));

    const ScoredOutcome poor = on_game_scored(s, p, attempt_with(0.0), st, 1000);
    CHECK_FALSE(poor.positive_interaction);
    CHECK(std::get<FaceUpdate>(poor.event.payload).mood == doctest::Approx(49.9899));

    CHECK(on_game_scored(s, p, attempt_with(1.0 / 3.0), st, 1000).positive_interaction);
}

TEST_CASE("emotions heartbeat") {
    const EngineParams p;
    const StrategyConfig s = strategy(Condition::Emotions);
    const EngagementState st = start_session(s, p, 0).state;

    double mood = 50.0, delta = 1e-5;
    for (int i = 0; i < 60; ++i) {
        delta = std::min(delta + 1e-7, 1e-4);
        mood = std::max(1.0, mood - delta * 1000.0);
    }
    const HeartbeatOutcome hb = idle_heartbeat(s, p, st, 60'000);
    CHECK(hb.state.mood.mood == doctest::Approx(mood).epsilon(1e-13));
    CHECK(hb.state.mood.mood == doctest::Approx(49.217).epsilon(1e-12));
    REQUIRE(hb.event.has_value());
    CHECK(std::get<FaceUpdate>(hb.event->payload).mood == hb.state.mood.mood);

    const HeartbeatOutcome quiet = idle_heartbeat(s, p, st, 500);
    CHECK_FALSE(quiet.event.has_value());
    CHECK(quiet.state.mood == st.mood);

    // Small drifts accumulate until they cross the render threshold.
    const HeartbeatOutcome small = idle_heartbeat(s, p, st, 10'000);
    CHECK_FALSE(small.event.has_value());
    CHECK(small.state.mood.mood < 50.0);
}

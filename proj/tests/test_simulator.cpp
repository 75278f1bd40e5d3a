#include "affecta/analytics.hpp"
#include "affecta/simulator.hpp"

#include <doctest.h>

using namespace affecta;

namespace {

double mean_accuracy(const SessionLog& log) {
    const SessionMetrics m = session_metrics(log);
    REQUIRE(m.accuracy_mean.has_value());
    return *m.accuracy_mean;
}

}  // namespace

TEST_CASE("same seed, same log") {
    UserProfile p;
    p.seed = 77;
    p.abandon_probability = 0.1;
    const SessionLog a = run_session(p, Condition::Emotions, 20.0);
    const SessionLog b = run_session(p, Condition::Emotions, 20.0);
    CHECK(serialize_log(a) == serialize_log(b));
    p.seed = 78;
    CHECK(serialize_log(run_session(p, Condition::Emotions, 20.0)) != serialize_log(a));
}

TEST_CASE("noise limits") {
    UserProfile p;
    p.seed = 5;
    p.timing_jitter_sigma_ms = 0.0;
    p.abandon_probability = 0.0;
    const SessionLog perfect = run_session(p, Condition::Points, 15.0);
    const SessionMetrics m = session_metrics(perfect);
    CHECK(m.total_game_attempts > 5);
    CHECK(*m.accuracy_mean == 1.0);
    CHECK(*m.accuracy_sd == 0.0);

    p.timing_jitter_sigma_ms = 1e6;
    CHECK(mean_accuracy(run_session(p, Condition::Points, 30.0)) < 0.05);
}

TEST_CASE("less jitter means better accuracy on average") {
    double prev = 0.0;
    for (double sigma : {400.0, 200.0, 80.0}) {
        double total = 0.0;
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            UserProfile p;
            p.seed = seed;
            p.interaction_rate_per_min = 4.0;
            p.timing_jitter_sigma_ms = sigma;
            total += mean_accuracy(run_session(p, Condition::Emotions, 30.0));
        }
        CHECK(total / 4.0 > prev);
        prev = total / 4.0;
    }
}

TEST_CASE("feedback records follow the condition") {
    UserProfile p;
    p.seed = 9;
    const SessionLog pts = run_session(p, Condition::Points, 10.0);
    std::int64_t coins = 0, attempts = 0;
    for (const auto& r : pts.records) {
        if (std::holds_alternative<rec::Coin>(r.body)) ++coins;
        if (std::holds_alternative<rec::AttemptScored>(r.body)) ++attempts;
        if (const auto* f = std::get_if<rec::Face>(&r.body)) CHECK(f->mood == 100.0);
    }
    CHECK(coins == attempts);

    const SessionLog emo = run_session(p, Condition::Emotions, 10.0);
    for (const auto& r : emo.records) CHECK_FALSE(std::holds_alternative<rec::Coin>(r.body));
}

TEST_CASE("presets") {
    const auto names = paper_scenario_names();
    CHECK(names.size() == 2);
    const Scenario s = paper_scenario("paper-points");
    CHECK(s.cohort.size() == 7);
    CHECK(s.condition == Condition::Points);
    CHECK(paper_scenario("paper-points", 1).cohort[0].seed != s.cohort[0].seed);
    CHECK_THROWS_AS(paper_scenario("paper-banana"), std::invalid_argument);

    const auto serial = run_scenario(paper_scenario("paper-emotions"), {}, 1);
    const auto parallel = run_scenario(paper_scenario("paper-emotions"), {}, 4);
    REQUIRE(serial.size() == 7);
    CHECK(serial == parallel);
    CHECK(serial[0].header.session_id == "paper-emotions-01");
}

TEST_CASE("scenario files") {
    const Scenario s = parse_scenario(R"(# pilot
name = pilot
condition = points
duration_minutes = 12
profile = rate=2.5 sigma=160 drift=-1 abandon=0.05 seed=7
profile = rate=3 sigma=120 seed=8
)");
    CHECK(s.name == "pilot");
    CHECK(s.duration_minutes == 12.0);
    REQUIRE(s.cohort.size() == 2);
    CHECK(s.cohort[0].jitter_drift_ms_per_min == -1.0);
    CHECK(s.cohort[1].abandon_probability == 0.0);

    CHECK_THROWS(parse_scenario("name = x\ncondition = points\nprofile = rate=2 colour=red\n"));
    CHECK_THROWS(parse_scenario("name = x\ncondition = points\nspeed = 3\n"));
    CHECK_THROWS(parse_scenario("condition = points\nprofile = rate=2\n"));
    CHECK_THROWS(parse_scenario("name = x\ncondition = points\nprofile = rate=-2\n"));
}

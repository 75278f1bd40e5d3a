#include "affecta/affect.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

using namespace affecta;

namespace {

// Straight-line reference of the decay step, kept independent of tick().
struct RefMood {
    double mood;
    double delta;
};

RefMood ref_steps(RefMood s, int steps) {
    for (int i = 0; i < steps; ++i) {
        s.delta = std::min(s.delta + 1e-7, 1e-4);
        s.mood = std::max(1.0, s.mood - s.delta * 1000.0);
    }
    return s;
}

MoodState at(double mood, double delta, double impact = 0.0, TimestampMs t = 0) {
    return MoodState{mood, delta, impact, t, t};
}

}  // namespace

TEST_CASE("new_state echoes defaults and checks the initial mood") {
    EngineParams p;
    const MoodState s = new_state(p, 0);
    CHECK(s.mood == 50.0);
    CHECK(s.decay_rate == 1e-5);
    CHECK(s.impact == 0.0);

    p.mood_init = 100.0;
    CHECK(new_state(p, 0).mood == 100.0);
    p.mood_init = 150.0;
    CHECK_THROWS_AS(new_state(p, 0), std::invalid_argument);
}

TEST_CASE("set_param rejects unknown keys") {
    EngineParams p;
    set_param(p, "decay_cap", 2e-4);
    CHECK(p.decay_cap == 2e-4);
    CHECK_THROWS_AS(set_param(p, "decay_capp", 1.0), std::invalid_argument);
    CHECK_THROWS(set_param(p, "tick_interval_ms", 10.5));
}

TEST_CASE("decay step") {
    const EngineParams p;
    SUBCASE("at the cap") {
        const MoodState s = tick(at(50.0, 1e-4), p, 1000);
        CHECK(s.mood == doctest::Approx(49.9).epsilon(1e-14));
        CHECK(s.decay_rate == 1e-4);
    }
    SUBCASE("increment happens before the step") {
        const MoodState s = tick(at(50.0, 1e-5), p, 1000);
        CHECK(s.decay_rate == doctest::Approx(1.01e-5).epsilon(1e-14));
        CHECK(s.mood == doctest::Approx(49.9899).epsilon(1e-14));
    }
    SUBCASE("floor clamp over ten steps matches the reference loop") {
        const MoodState s = tick(at(1.0005, 1e-5), p, 10'000);
        const RefMood r = ref_steps({1.0005, 1e-5}, 10);
        CHECK(s.mood == 1.0);
        CHECK(s.mood == r.mood);
        CHECK(s.decay_rate == r.delta);
    }
    SUBCASE("partial intervals do not tick") {
        const MoodState s0 = at(50.0, 1e-5);
        const MoodState s = tick(s0, p, 999);
        CHECK(s == s0);
        const MoodState s2 = tick(s0, p, 2500);
        CHECK(s2.last_decay_tick_ms == 2000);
    }
    SUBCASE("time regression") {
        CHECK_THROWS_AS(tick(at(50.0, 1e-5, 0.0, 5000), p, 4000), TimeRegressionError);
    }
    SUBCASE("long idle reaches the fixed point and stays there") {
        const MoodState s = tick(at(100.0, 1e-5), p, 86'400'000);
        CHECK(s.mood == 1.0);
        CHECK(s.decay_rate == 1e-4);
        CHECK(s.last_decay_tick_ms == 86'400'000);
    }
}

TEST_CASE("impact function") {
    const EngineParams p;
    CHECK(impact_at(at(50, 1e-5, 0.0), p, 3'600'000) == 2700.0);
    CHECK(impact_at(at(50, 1e-5, 5.0), p, 0) == 5.0);
    CHECK(impact_at(at(50, 1e-5, 0.0), p, 1'000'000) == doctest::Approx(750.0).epsilon(1e-15));
    CHECK(impact_at(at(50, 1e-5, 0.0), p, 3'599'999) == doctest::Approx(0.75 * 3599.999).epsilon(1e-15));
    CHECK_THROWS_AS(impact_at(at(50, 1e-5, 0.0, 10), p, 9), TimeRegressionError);
}

TEST_CASE("interaction update") {
    const EngineParams p;
    SUBCASE("one second after the last interaction") {
        // Anchor the decay clock at the interaction time so no tick intervenes.
        MoodState s{50.0, 1e-5, 0.0, 0, 1000};
        const InteractionResult r = interact(s, p, 1000);
        CHECK(r.impact_spent == doctest::Approx(0.75));
        CHECK(r.state.mood == doctest::Approx(87.5).epsilon(1e-14));
        CHECK(r.state.impact == doctest::Approx(0.5625).epsilon(1e-14));
        CHECK(r.state.decay_rate == doctest::Approx(5e-9).epsilon(1e-14));
    }
    SUBCASE("due ticks are applied first") {
        const InteractionResult r = interact(new_state(p, 0), p, 1000);
        CHECK(r.mood_before == doctest::Approx(49.9899).epsilon(1e-14));
        CHECK(r.state.mood == doctest::Approx(49.9899 + 37.5).epsilon(1e-14));
    }
    SUBCASE("plateau branch and ceiling") {
        MoodState s{50.0, 1e-5, 0.0, 0, 7'200'000};
        const InteractionResult r = interact(s, p, 7'200'000);
        CHECK(r.impact_spent == 2700.0);
        CHECK(r.state.mood == 100.0);
        CHECK(r.state.impact == 2025.0);
        CHECK(r.unclamped_gain == 135000.0);
        CHECK(r.applied_gain() == 50.0);
    }
    SUBCASE("decay rate never underflows to zero") {
        MoodState s = new_state(p, 0);
        for (int i = 0; i < 200; ++i) s = on_interaction(s, p, 500);
        CHECK(s.decay_rate > 0.0);
        CHECK(s.decay_rate == kDecayFloor);
    }
}

TEST_CASE("burst interactions gain less than spread ones") {
    const EngineParams p;
    auto cumulative = [&](TimestampMs spacing) {
        MoodState s = new_state(p, 0);
        double total = 0.0;
        for (int i = 1; i <= 5; ++i) {
            const InteractionResult r = interact(s, p, i * spacing);
            total += r.unclamped_gain;
            s = r.state;
        }
        return total;
    };
    // Reference: with I0 = 0 and no clamps, impact before interaction k is
    // 0.75 * sum_{j<=k} 0.75^(k-j) * tau_j.
    auto reference = [](double tau_s) {
        double impact = 0.0;
        double total = 0.0;
        for (int i = 0; i < 5; ++i) {
            const double g = impact + 0.75 * tau_s;
            total += 50.0 * g;
            impact = 0.75 * g;
        }
        return total;
    };
    CHECK(cumulative(100) == doctest::Approx(reference(0.1)).epsilon(1e-12));
    CHECK(cumulative(10'000) == doctest::Approx(reference(10.0)).epsilon(1e-12));
    CHECK(cumulative(100) < cumulative(10'000));
}

TEST_CASE("randomized schedules keep the invariants and batch ticks match stepwise ticks") {
    const EngineParams p;
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 500; ++trial) {
        MoodState batch = new_state(p, 0);
        MoodState step = batch;
        TimestampMs now = 0;
        for (int e = 0; e < 30; ++e) {
            now += std::uniform_int_distribution<TimestampMs>(0, 120'000)(gen);
            if (gen() % 3 == 0) {
                batch = on_interaction(batch, p, now);
                for (TimestampMs t = step.last_decay_tick_ms + 1000; t <= now; t += 1000) step = tick(step, p, t);
                step = on_interaction(step, p, now);
            } else {
                batch = tick(batch, p, now);
                for (TimestampMs t = step.last_decay_tick_ms + 1000; t <= now; t += 1000) step = tick(step, p, t);
            }
            REQUIRE(batch == step);
            REQUIRE(batch.mood >= 1.0);
            REQUIRE(batch.mood <= 100.0);
            REQUIRE(batch.decay_rate > 0.0);
            REQUIRE(batch.decay_rate <= 1e-4);
            REQUIRE(batch.impact >= 0.0);
        }
    }
}

TEST_CASE("state digest is stable and sensitive") {
    const EngineParams p;
    const MoodState a = new_state(p, 0);
    MoodState b = a;
    CHECK(state_digest(a) == state_digest(b));
    b.mood = std::nextafter(b.mood, 100.0);
    CHECK(state_digest(a) != state_digest(b));
}

#include "affecta/expression.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace affecta;

TEST_CASE("face endpoints and midpoint") {
    CHECK(face_for_mood(100.0) == FaceDescriptor{30.0, 1.0});
    CHECK(face_for_mood(1.0) == FaceDescriptor{-30.0, -1.0});
    const FaceDescriptor mid = face_for_mood(50.5);
    CHECK(mid.eyebrow_angle_deg == doctest::Approx(0.0));
    CHECK(mid.eye_curvature == doctest::Approx(0.0));
}

TEST_CASE("face is strictly increasing and invertible") {
    FaceDescriptor prev = face_for_mood(1.0);
    for (double m = 1.25; m <= 100.0; m += 0.25) {
        const FaceDescriptor f = face_for_mood(m);
        CHECK(f.eyebrow_angle_deg > prev.eyebrow_angle_deg);
        CHECK(f.eye_curvature > prev.eye_curvature);
        CHECK(mood_for_face(f) == doctest::Approx(m).epsilon(1e-12));
        prev = f;
    }
}

TEST_CASE("out-of-range moods are rejected") {
    CHECK_THROWS_AS(face_for_mood(0.5), std::invalid_argument);
    CHECK_THROWS_AS(face_for_mood(100.5), std::invalid_argument);
}

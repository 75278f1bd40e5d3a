#pragma once

// Stepless mood -> face mapping. Both face parameters are affine in mood, so
// the face has no discrete expression buckets and the mood can be recovered
// from either parameter.

namespace affecta {

struct ExpressionConfig {
    double mood_min = 1.0;
    double mood_max = 100.0;
    double max_eyebrow_angle_deg = 30.0;  // sad end is the negation
    double max_eye_curvature = 1.0;

    void validate() const;
};

struct FaceDescriptor {
    double eyebrow_angle_deg = 0.0;  // [-30, +30] by default
    double eye_curvature = 0.0;      // -1 frown arc .. +1 smile arc

    bool operator==(const FaceDescriptor&) const = default;
};

/// Throws std::invalid_argument when mood lies outside [mood_min, mood_max].
FaceDescriptor face_for_mood(double mood, const ExpressionConfig& config = {});

/// Inverse of face_for_mood, read off the eyebrow angle.
double mood_for_face(const FaceDescriptor& face, const ExpressionConfig& config = {});

}  // namespace affecta

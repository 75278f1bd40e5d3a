#include "affecta/expression.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace affecta {

void ExpressionConfig::validate() const {
    if (!(mood_min < mood_max)) {
        throw std::invalid_argument("expression mood range is empty");
    }
    if (!(max_eyebrow_angle_deg > 0.0) || !(max_eye_curvature > 0.0)) {
        throw std::invalid_argument("expression extents must be positive");
    }
}

FaceDescriptor face_for_mood(double mood, const ExpressionConfig& config) {
    config.validate();
    if (!(mood >= config.mood_min && mood <= config.mood_max)) {
        throw std::invalid_argument("mood " + std::to_string(mood) + " outside expression range");
    }
    // Position in [-1, 1]; the midpoint of the mood range maps to exactly 0.
    const double span = config.mood_max - config.mood_min;
    const double u = (2.0 * (mood - config.mood_min) - span) / span;
    return FaceDescriptor{
        .eyebrow_angle_deg = u * config.max_eyebrow_angle_deg,
        .eye_curvature = u * config.max_eye_curvature,
    };
}

double mood_for_face(const FaceDescriptor& face, const ExpressionConfig& config) {
    config.validate();
    const double u = face.eyebrow_angle_deg / config.max_eyebrow_angle_deg;
    const double span = config.mood_max - config.mood_min;
    return config.mood_min + (u + 1.0) * span / 2.0;
}

}  // namespace affecta

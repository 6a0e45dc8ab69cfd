#pragma once

#include <cmath>

#include "mdbell/geometry.hpp"
#include "mdbell/random.hpp"

namespace mdbell {

/// Uniform direction on the sphere: cos(theta) uniform on [-1, 1], azimuth uniform
/// on [0, 2pi). Consumes exactly two doubles from the stream, in that order.
inline UnitVec3 sample_uniform_sphere(RandomStream& stream) {
    const double c = 2.0 * stream.next_double() - 1.0;
    const double phi = kTwoPi * stream.next_double();
    const double s = std::sqrt(std::fmax(0.0, 1.0 - c * c));
    return UnitVec3(Vec3{s * std::cos(phi), s * std::sin(phi), c});
}

/// Direction with density |axis_frame.e3 . lambda| / (2pi), i.e. cosine-weighted
/// about the frame's e3 axis.
///
/// The cosine c = e3 . lambda has density |c| on [-1, 1]; its inverse CDF is
///   c = -sqrt(1 - 2u)  for u < 1/2,   c = sqrt(2u - 1)  otherwise,
/// which is exact and rejection-free. The azimuth is uniform. Consumes exactly
/// two doubles from the stream: first u, then the azimuth.
inline UnitVec3 sample_cosine_weighted(const Frame& axis_frame, RandomStream& stream) {
    const double u = stream.next_double();
    const double c = u < 0.5 ? -std::sqrt(1.0 - 2.0 * u) : std::sqrt(2.0 * u - 1.0);
    const double phi = kTwoPi * stream.next_double();
    const double s = std::sqrt(std::fmax(0.0, 1.0 - c * c));
    const Vec3 v = c * axis_frame.e3.vec() +
                   s * std::cos(phi) * axis_frame.e1.vec() +
                   s * std::sin(phi) * axis_frame.e2.vec();
    return UnitVec3(v);
}

inline UnitVec3 sample_cosine_weighted(const UnitVec3& axis, RandomStream& stream) {
    return sample_cosine_weighted(orthonormal_frame(axis), stream);
}

}  // namespace mdbell

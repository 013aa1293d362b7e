#pragma once

#include <cmath>
#include <numbers>

namespace sqkd {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr double kQuarterPi = std::numbers::pi / 4.0;

/// Absolute tolerance used for every angle comparison after canonicalization.
inline constexpr double kAngleTolerance = 1e-9;

/// Map any real onto the canonical range [0, pi).
inline double canonical_radians(double radians) noexcept
{
    double r = std::fmod(radians, kPi);
    if (r < 0.0)
        r += kPi;
    // fmod of a tiny negative number plus pi can round up to exactly pi.
    if (r >= kPi)
        r = 0.0;
    return r;
}

/// Linear-polarization direction. Axis-like: theta and theta + pi are the
/// same physical state, so the stored value always lies in [0, pi).
class PolarizationAngle
{
  public:
    constexpr PolarizationAngle() noexcept = default;
    explicit PolarizationAngle(double radians) noexcept
        : radians_(canonical_radians(radians))
    {
    }

    double radians() const noexcept { return radians_; }

    PolarizationAngle rotated(double delta) const noexcept
    {
        return PolarizationAngle(radians_ + delta);
    }

    /// Distance between two axes on the circle of circumference pi; in
    /// [0, pi/2].
    double axis_distance(PolarizationAngle other) const noexcept
    {
        double d = canonical_radians(radians_ - other.radians_);
        return d > kHalfPi ? kPi - d : d;
    }

    bool approx_equal(PolarizationAngle other,
                      double tol = kAngleTolerance) const noexcept
    {
        return axis_distance(other) <= tol;
    }

    bool approx_orthogonal(PolarizationAngle other,
                           double tol = kAngleTolerance) const noexcept
    {
        return kHalfPi - axis_distance(other) <= tol;
    }

    friend bool operator==(PolarizationAngle, PolarizationAngle) = default;

  private:
    double radians_ = 0.0;
};

/// Rotation U(delta) acting on a polarization state.
inline PolarizationAngle rotate(PolarizationAngle state, double delta) noexcept
{
    return state.rotated(delta);
}

/// Probability that `state` collapses onto `axis` (Born rule, cos^2 of the
/// angle between them). Aligned and orthogonal states within
/// kAngleTolerance give exactly 1 and 0.
inline double aligned_probability(PolarizationAngle state,
                                  PolarizationAngle axis) noexcept
{
    double d = state.axis_distance(axis);
    if (d <= kAngleTolerance)
        return 1.0;
    if (kHalfPi - d <= kAngleTolerance)
        return 0.0;
    double c = std::cos(d);
    return c * c;
}

}  // namespace sqkd

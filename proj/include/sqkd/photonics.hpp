#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sqkd/angle.hpp"
#include "sqkd/random.hpp"

namespace sqkd {

/// Detector outcome or key bit; always 0 or 1.
using Bit = std::uint8_t;

using RoundId = std::uint64_t;

/// Where a photon came from. Diagnostic bookkeeping for the analysis layer;
/// Alice and Bob never branch on it.
enum class Origin : std::uint8_t
{
    Legitimate,
    TrojanInjected,
    EveReplayed,
};

struct Photon
{
    PolarizationAngle polarization;
    Origin origin = Origin::Legitimate;
};

/// Unit carried on the quantum channel. An empty pulse is vacuum.
struct Pulse
{
    std::vector<Photon> photons;
    RoundId round_id = 0;

    std::size_t size() const noexcept { return photons.size(); }
    bool empty() const noexcept { return photons.empty(); }

    /// Apply U(delta) to every photon in the pulse.
    void rotate_all(double delta)
    {
        for (auto& p : photons)
            p.polarization = p.polarization.rotated(delta);
    }
};

/// Projective measurement with outcome 0 on `axis` and 1 on `axis + pi/2`.
class MeasurementBasis
{
  public:
    explicit MeasurementBasis(PolarizationAngle axis) noexcept : axis_(axis) {}
    explicit MeasurementBasis(double axis_radians) noexcept
        : axis_(axis_radians)
    {
    }

    PolarizationAngle axis() const noexcept { return axis_; }
    PolarizationAngle orthogonal_axis() const noexcept
    {
        return axis_.rotated(kHalfPi);
    }

    /// The (+pi/4, -pi/4) basis used by Bob and by Alice's analyzing
    /// detector. Outcome 1 means collapse onto -pi/4.
    static MeasurementBasis diagonal() noexcept
    {
        return MeasurementBasis(kQuarterPi);
    }

  private:
    PolarizationAngle axis_;
};

enum class PhotonMode : std::uint8_t
{
    SinglePhoton,
    Pulse,
};

/// Photon-number model for freshly prepared pulses.
struct SourceModel
{
    PhotonMode mode = PhotonMode::SinglePhoton;
    double mean_photons = 1.0;  // used only in Pulse mode

    static SourceModel single_photon() noexcept { return {}; }
    static SourceModel poisson(double mean) noexcept
    {
        return {PhotonMode::Pulse, mean};
    }
};

/// Born-rule measurement. Consumes the photon.
Bit measure(Photon&& photon, MeasurementBasis basis, RandomSource& rng);

/// Pulse with Poisson(mean_photons) photons, all at `polarization`.
/// Throws ParameterError for a negative mean.
Pulse make_pulse(PolarizationAngle polarization, double mean_photons,
                 RandomSource& rng);

/// Pulse of exactly one photon.
Pulse make_single_photon(PolarizationAngle polarization);

/// Prepare a pulse according to the configured source model.
Pulse prepare(PolarizationAngle polarization, SourceModel const& source,
              RandomSource& rng);

struct SplitPulse
{
    Pulse tapped;
    Pulse passed;
};

/// Each photon independently goes to `tapped` with probability
/// tap_fraction, otherwise to `passed`. Throws ParameterError when
/// tap_fraction is outside [0, 1].
SplitPulse beam_split(Pulse pulse, double tap_fraction, RandomSource& rng);

/// Route each photon uniformly at random into one of `ways` sub-pulses
/// (a balanced 1-to-N splitter).
std::vector<Pulse> split_evenly(Pulse pulse, std::size_t ways,
                                RandomSource& rng);

}  // namespace sqkd

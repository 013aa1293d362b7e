#include "sqkd/photonics.hpp"

#include <string>

#include "sqkd/errors.hpp"

namespace sqkd {

Bit measure(Photon&& photon, MeasurementBasis basis, RandomSource& rng)
{
    double p0 = aligned_probability(photon.polarization, basis.axis());
    // Deterministic cases must not consume randomness differently from the
    // general case, so always draw.
    double u = rng.uniform();
    if (p0 >= 1.0)
        return 0;
    if (p0 <= 0.0)
        return 1;
    return u < p0 ? 0 : 1;
}

Pulse make_pulse(PolarizationAngle polarization, double mean_photons,
                 RandomSource& rng)
{
    if (!(mean_photons >= 0.0))
        throw ParameterError("make_pulse: mean_photons must be >= 0, got "
                             + std::to_string(mean_photons));
    Pulse pulse;
    unsigned n = rng.poisson(mean_photons);
    pulse.photons.assign(n, Photon{polarization, Origin::Legitimate});
    return pulse;
}

Pulse make_single_photon(PolarizationAngle polarization)
{
    Pulse pulse;
    pulse.photons.push_back(Photon{polarization, Origin::Legitimate});
    return pulse;
}

Pulse prepare(PolarizationAngle polarization, SourceModel const& source,
              RandomSource& rng)
{
    if (source.mode == PhotonMode::SinglePhoton)
        return make_single_photon(polarization);
    return make_pulse(polarization, source.mean_photons, rng);
}

SplitPulse beam_split(Pulse pulse, double tap_fraction, RandomSource& rng)
{
    if (!(tap_fraction >= 0.0 && tap_fraction <= 1.0))
        throw ParameterError("beam_split: tap_fraction must be in [0, 1], got "
                             + std::to_string(tap_fraction));
    SplitPulse out;
    out.tapped.round_id = pulse.round_id;
    out.passed.round_id = pulse.round_id;
    for (auto& photon : pulse.photons)
    {
        if (rng.bernoulli(tap_fraction))
            out.tapped.photons.push_back(photon);
        else
            out.passed.photons.push_back(photon);
    }
    return out;
}

std::vector<Pulse> split_evenly(Pulse pulse, std::size_t ways,
                                RandomSource& rng)
{
    if (ways == 0)
        throw ParameterError("split_evenly: ways must be >= 1");
    std::vector<Pulse> parts(ways);
    for (auto& part : parts)
        part.round_id = pulse.round_id;
    for (auto& photon : pulse.photons)
    {
        auto slot = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(ways) - 1));
        parts[slot].photons.push_back(photon);
    }
    return parts;
}

}  // namespace sqkd

#include "sqkd/channel.hpp"

#include <string>

#include "sqkd/errors.hpp"

namespace sqkd {

std::string_view to_string(Leg leg) noexcept
{
    switch (leg)
    {
    case Leg::Leg1_AliceToBob: return "leg1";
    case Leg::Leg2_BobToAlice: return "leg2";
    case Leg::Leg3_AliceToBob: return "leg3";
    }
    return "unknown";
}

void Announcement::validate() const
{
    auto m = a_indices.size();
    if (b_indices.size() != m || analyzing_flags.size() != m
        || phi_star_values.size() != m)
    {
        throw ProtocolError(
            "announcement length mismatch: a=" + std::to_string(m)
            + " b=" + std::to_string(b_indices.size())
            + " flags=" + std::to_string(analyzing_flags.size())
            + " phi*=" + std::to_string(phi_star_values.size()));
    }
    for (std::size_t i = 0; i < m; ++i)
    {
        if (static_cast<bool>(analyzing_flags[i])
            != phi_star_values[i].has_value())
        {
            throw ProtocolError("announcement round " + std::to_string(i)
                                + ": phi* presence disagrees with flag");
        }
    }
}

Pulse transmit(Pulse pulse, Leg leg, Interceptor* interceptor, double loss,
               RandomSource& rng)
{
    if (!(loss >= 0.0 && loss <= 1.0))
        throw ParameterError("transmit: loss must be in [0, 1], got "
                             + std::to_string(loss));
    if (interceptor)
    {
        auto round = pulse.round_id;
        pulse = interceptor->intercept(leg, std::move(pulse), round);
        pulse.round_id = round;
    }
    if (loss == 0.0)
        return pulse;
    return beam_split(std::move(pulse), loss, rng).passed;
}

void PublicChannel::publish(Announcement announcement)
{
    if (published_)
        throw ProtocolError("announcement already published");
    announcement.validate();
    published_ = std::move(announcement);
    if (observer_)
        observer_->observe(*published_);
}

}  // namespace sqkd

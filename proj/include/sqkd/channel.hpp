#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sqkd/photonics.hpp"

namespace sqkd {

/// The three quantum-channel traversals of one round, in order.
enum class Leg : std::uint8_t
{
    Leg1_AliceToBob,
    Leg2_BobToAlice,
    Leg3_AliceToBob,
};

std::string_view to_string(Leg leg) noexcept;

/// Bob's analyzing angle phi* in {0, pi/2}.
enum class AnalyzingAngle : std::uint8_t
{
    Zero,
    HalfPi,
};

inline double radians(AnalyzingAngle a) noexcept
{
    return a == AnalyzingAngle::Zero ? 0.0 : kHalfPi;
}

/// 2 phi* / pi as a bit.
inline Bit as_bit(AnalyzingAngle a) noexcept
{
    return a == AnalyzingAngle::Zero ? 0 : 1;
}

/// Everything Alice and Bob disclose after the quantum phase. Public: the
/// adversary reads it.
struct Announcement
{
    std::vector<int> a_indices;  // Alice's screening indices, 1..N
    std::vector<int> b_indices;  // Bob's screening indices, 1..N
    std::vector<std::uint8_t> analyzing_flags;
    std::vector<std::optional<AnalyzingAngle>> phi_star_values;

    std::size_t rounds() const noexcept { return a_indices.size(); }

    /// Throws ProtocolError when the four lists disagree in length or a
    /// phi* value is missing/present against its flag.
    void validate() const;

    friend bool operator==(Announcement const&, Announcement const&) = default;
};

/// What the adversary holds about a single round after the session.
struct EveRoundReport
{
    std::optional<Bit> guess;
    /// Eve recovered one of her own injected photons on leg 3.
    bool captured_injected = false;
    /// For strategies with a conclusive/inconclusive readout: whether the
    /// readout was attempted and whether it was conclusive.
    bool readout_attempted = false;
    bool conclusive = false;
    /// Eve's hypothesis for Alice's encoding when she relays a re-encoded
    /// photon (screening index and bit). Diagnostic only.
    std::optional<int> relay_index;
    std::optional<Bit> relay_bit;
};

/// Adversary hook. Sees only what is physically or publicly available:
/// pulses in flight (with leg and round id) and the announcement. It never
/// receives theta, phi, k, or screening choices before publication.
class Interceptor
{
  public:
    virtual ~Interceptor() = default;

    virtual Pulse intercept(Leg leg, Pulse pulse, RoundId round) = 0;

    /// Invoked exactly once, when the announcement is published.
    virtual void observe(Announcement const& announcement)
    {
        (void)announcement;
    }

    /// Post-session per-round report, indexed by round id.
    virtual std::vector<EveRoundReport> report() const { return {}; }
};

/// Pass-through interceptor.
class IdentityInterceptor final : public Interceptor
{
  public:
    Pulse intercept(Leg, Pulse pulse, RoundId) override { return pulse; }
};

/// One traversal: interceptor first (if any), then independent per-photon
/// loss. Throws ParameterError for loss outside [0, 1].
Pulse transmit(Pulse pulse, Leg leg, Interceptor* interceptor, double loss,
               RandomSource& rng);

/// Authentic, public classical channel. Publication is one-shot.
class PublicChannel
{
  public:
    void attach_observer(Interceptor* observer) noexcept
    {
        observer_ = observer;
    }

    /// Throws ProtocolError on a second publish or an inconsistent
    /// announcement.
    void publish(Announcement announcement);

    /// nullptr until published.
    Announcement const* read_public() const noexcept
    {
        return published_ ? &*published_ : nullptr;
    }

  private:
    std::optional<Announcement> published_;
    Interceptor* observer_ = nullptr;
};

}  // namespace sqkd

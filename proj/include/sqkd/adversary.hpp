#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "sqkd/channel.hpp"
#include "sqkd/photonics.hpp"
#include "sqkd/protocol.hpp"

namespace sqkd {

enum class AttackKind : std::uint8_t
{
    None,
    ImpersonationSinglePhoton,
    PulseBeamSplit,
    PassivePNS,
    PnsTrojanComposite,
    CaiStandardState,
    SimpleTrojan,
};

std::string_view to_string(AttackKind kind) noexcept;
/// CLI/config names: none, impersonation, pulse_beamsplit, passive_pns,
/// pns_trojan, cai, simple_trojan. Throws ParameterError otherwise.
AttackKind parse_attack_kind(std::string_view name);

struct AttackConfig
{
    AttackKind kind = AttackKind::None;
    /// r: probability that Eve recovers each of her marked probe photons on
    /// leg 3. Unrecovered probes continue to Bob.
    double tap_fraction = 1.0;
    /// Probe polarization for the simple Trojan attack.
    double eta = 0.0;
    /// Per-round probability that Eve acts at all. 0 makes every strategy
    /// an identity channel.
    double attack_probability = 1.0;
    /// Impersonation: always guess this screening index instead of a
    /// uniform draw from S(N).
    std::optional<int> fixed_guess_index;

    /// Throws ConfigError naming the field. Checks strategy/mode
    /// compatibility against the protocol parameters.
    void validate(ProtocolParams const& params) const;
};

/// Build the interceptor for `config`, or nullptr for AttackKind::None.
/// `eve_seed` roots Eve's private random streams.
std::unique_ptr<Interceptor> make_interceptor(AttackConfig const& config,
                                              ProtocolParams const& params,
                                              std::uint64_t eve_seed);

/// Measurement axis Eve uses on a captured probe after the announcement.
/// The probe left Alice at (-1)^k pi/4 + alpha_a + offset, where offset is
/// whatever rotation Eve cannot remove (-theta for the |0> probe, eta for a
/// simple Trojan). `known_offset` is Eve's compensation for it.
inline MeasurementBasis probe_readout_basis(double alpha_a,
                                            double known_offset) noexcept
{
    return MeasurementBasis(alpha_a + known_offset + kQuarterPi);
}

/// Outcome of a single-photon readout as Alice's key bit: outcome 0 means
/// the photon was found on the +pi/4-shifted axis, i.e. k = 0.
inline Bit key_bit_from_outcome(Bit outcome) noexcept { return outcome; }

/// Screening-index and key-bit hypothesis about Alice's encoding.
struct EncodingHypothesis
{
    int index = 1;
    Bit k = 0;

    friend bool operator==(EncodingHypothesis, EncodingHypothesis) = default;
};

/// One detection made while probing Alice's output: the photon was
/// measured with axis alpha_{basis_index} + pi/4 and gave `outcome`.
struct ProbeOutcome
{
    int basis_index = 1;
    Bit outcome = 0;
};

/// Hypotheses (alpha_j, k) under which every outcome has nonzero Born
/// probability. The state under a hypothesis is (-1)^k pi/4 + alpha_j.
std::vector<EncodingHypothesis>
consistent_hypotheses(std::vector<ProbeOutcome> const& outcomes, int N);

}  // namespace sqkd

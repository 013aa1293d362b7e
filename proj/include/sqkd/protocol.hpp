#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sqkd/channel.hpp"
#include "sqkd/digest.hpp"
#include "sqkd/photonics.hpp"
#include "sqkd/random.hpp"

namespace sqkd {

struct ProtocolParams
{
    int N = 2;                  // number of screening angles
    std::size_t rounds = 1000;  // M
    double p_a = 0.2;           // probability Bob picks an analyzing angle
    double t = 0.9;             // AD transmission coefficient
    SourceModel source = SourceModel::single_photon();
    double loss = 0.0;          // per-leg, per-photon channel loss
    std::uint64_t seed = 0;
    DigestAlgorithm digest = DigestAlgorithm::Sha256;

    /// Throws ParameterError naming the offending field.
    void validate() const;
};

/// alpha_i = i * pi / (2 (N + 1)) for 1-based index i.
double screening_radians(int index, int N);

/// [alpha_1, ..., alpha_N]; strictly increasing, all inside (0, pi/2).
/// Throws ParameterError for N < 1.
std::vector<PolarizationAngle> screening_angles(int N);

/// alpha_a + alpha_b = pi/2 exactly when the indices sum to N + 1.
inline bool screening_matched(int a_index, int b_index, int N) noexcept
{
    return a_index + b_index == N + 1;
}

/// Expected AD outcome on a matched analyzing round:
/// O_a = k xor (2 phi* / pi) xor 1.
inline Bit integrity_expected_bit(Bit k, AnalyzingAngle phi_star) noexcept
{
    return static_cast<Bit>(k ^ as_bit(phi_star) ^ 1u);
}

struct AdClick
{
    Bit outcome = 0;
    Origin origin = Origin::Legitimate;  // diagnostic only

    friend bool operator==(AdClick const&, AdClick const&) = default;
};

struct RoundRecord
{
    RoundId round_id = 0;
    PolarizationAngle theta;
    PolarizationAngle phi;
    bool is_analyzing = false;
    std::optional<AnalyzingAngle> phi_star;
    int a_index = 1;
    int b_index = 1;
    Bit k = 0;
    std::vector<AdClick> ad_clicks;
    /// Present iff Bob received at least one photon and all of his
    /// detections agreed.
    std::optional<Bit> bob_outcome;
    std::size_t bob_received_photons = 0;
    bool bob_double_click = false;

    friend bool operator==(RoundRecord const&, RoundRecord const&) = default;
};

enum class Verdict : std::uint8_t
{
    Accepted,
    HashMismatch,
    IntegrityViolation,
};

std::string_view to_string(Verdict verdict) noexcept;

struct SessionTranscript
{
    ProtocolParams params;
    std::vector<RoundRecord> rounds;
    Announcement announcements;
    BitString alice_key;
    BitString bob_key;
    Digest alice_hash{};
    Digest bob_hash{};
    std::size_t integrity_checks = 0;
    std::size_t integrity_violations = 0;
    Verdict verdict = Verdict::Accepted;
};

// ---------------------------------------------------------------------------
// Party operations. Each takes its own random source.
// ---------------------------------------------------------------------------

struct PreparedQubit
{
    PolarizationAngle theta;
    Pulse pulse;
};

/// Alice: theta uniform on [0, pi); pulse polarized at theta.
PreparedQubit alice_prepare(SourceModel const& source, RandomSource& rng);

struct BobChoice
{
    PolarizationAngle phi;
    int b_index = 1;
    bool is_analyzing = false;
    std::optional<AnalyzingAngle> phi_star;
};

/// Bob's random choices for his rotation.
BobChoice bob_choose(int N, double p_a, RandomSource& rng);

struct BobTransform
{
    Pulse pulse;
    BobChoice choice;
};

/// Bob: choose phi and alpha_b, rotate every photon by phi + alpha_b.
BobTransform bob_transform(Pulse pulse, int N, double p_a, RandomSource& rng);

/// Apply Bob's rotation for a fixed choice.
Pulse bob_apply(Pulse pulse, BobChoice const& choice, int N);

struct EncodedPulse
{
    Pulse to_bob;
    std::vector<AdClick> ad_clicks;
};

/// Alice: rotate every photon present by -theta + (-1)^k pi/4 + alpha_a,
/// tap a fraction (1 - t) into the analyzing detector (diagonal basis),
/// pass the rest on.
EncodedPulse alice_encode(Pulse pulse, PolarizationAngle theta, Bit k,
                          int a_index, int N, double t, RandomSource& rng);

struct BobReadout
{
    std::optional<Bit> outcome;
    std::size_t received = 0;
    bool double_click = false;
};

/// Bob: rotate by -phi and measure each photon in the diagonal basis.
/// Disagreeing detections are a double click and yield no bit.
BobReadout bob_decode(Pulse pulse, PolarizationAngle phi, RandomSource& rng);

/// Round records -> public announcement.
Announcement make_announcement(std::vector<RoundRecord> const& rounds);

/// Sifting and verification: build both keys from matched, non-analyzing, detected rounds,
/// hash them, check the AD integrity condition on matched analyzing rounds,
/// and set the verdict. Uses `transcript.announcements` as the public
/// record; throws ProtocolError if its length disagrees with the rounds.
void sift_and_verify(SessionTranscript& transcript);

/// Run all M rounds with an optional adversary on the channel.
SessionTranscript run_session(ProtocolParams const& params,
                              Interceptor* interceptor = nullptr);

/// Random-stream ids used to derive per-party, per-round sources from the
/// session seed.
enum class Stream : std::uint64_t
{
    Alice = 1,
    Bob = 2,
    Channel = 3,
    Eve = 4,
};

RandomSource round_source(std::uint64_t session_seed, Stream stream,
                          RoundId round);

/// Line-delimited audit record: one session header line, one line per
/// round, one summary line.
void write_transcript(SessionTranscript const& transcript, std::ostream& os);

}  // namespace sqkd

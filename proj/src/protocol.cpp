#include "sqkd/protocol.hpp"

#include <ostream>
#include <string>

#include <json.hpp>

#include "sqkd/errors.hpp"
#include "sqkd/json_io.hpp"

namespace sqkd {

namespace {

void require_fraction(double value, char const* field)
{
    if (!(value >= 0.0 && value <= 1.0))
        throw ParameterError(std::string(field) + " must be in [0, 1], got "
                             + std::to_string(value));
}

double encoding_sign_angle(Bit k) noexcept
{
    return k == 0 ? kQuarterPi : -kQuarterPi;
}

}  // namespace

void ProtocolParams::validate() const
{
    if (N < 1)
        throw ParameterError("N must be >= 1, got " + std::to_string(N));
    if (rounds < 1)
        throw ParameterError("rounds must be >= 1");
    require_fraction(p_a, "p_a");
    require_fraction(t, "t");
    require_fraction(loss, "loss");
    if (source.mode == PhotonMode::Pulse && !(source.mean_photons >= 0.0))
        throw ParameterError("mu must be >= 0, got "
                             + std::to_string(source.mean_photons));
}

std::string_view to_string(Verdict verdict) noexcept
{
    switch (verdict)
    {
    case Verdict::Accepted: return "Accepted";
    case Verdict::HashMismatch: return "HashMismatch";
    case Verdict::IntegrityViolation: return "IntegrityViolation";
    }
    return "unknown";
}

double screening_radians(int index, int N)
{
    if (N < 1)
        throw ParameterError("screening angles: N must be >= 1, got "
                             + std::to_string(N));
    if (index < 1 || index > N)
        throw ParameterError("screening index " + std::to_string(index)
                             + " outside [1, " + std::to_string(N) + "]");
    return index * kPi / (2.0 * (N + 1));
}

std::vector<PolarizationAngle> screening_angles(int N)
{
    if (N < 1)
        throw ParameterError("screening angles: N must be >= 1, got "
                             + std::to_string(N));
    std::vector<PolarizationAngle> out;
    out.reserve(static_cast<std::size_t>(N));
    for (int i = 1; i <= N; ++i)
        out.emplace_back(screening_radians(i, N));
    return out;
}

RandomSource round_source(std::uint64_t session_seed, Stream stream,
                          RoundId round)
{
    auto party = RandomSource::derive_seed(session_seed,
                                           static_cast<std::uint64_t>(stream));
    return RandomSource(RandomSource::derive_seed(party, round));
}

PreparedQubit alice_prepare(SourceModel const& source, RandomSource& rng)
{
    PolarizationAngle theta(rng.uniform(0.0, kPi));
    return {theta, prepare(theta, source, rng)};
}

BobChoice bob_choose(int N, double p_a, RandomSource& rng)
{
    BobChoice c;
    c.b_index = rng.uniform_int(1, N);
    c.is_analyzing = rng.bernoulli(p_a);
    if (c.is_analyzing)
    {
        c.phi_star = rng.bit() ? AnalyzingAngle::HalfPi : AnalyzingAngle::Zero;
        c.phi = PolarizationAngle(radians(*c.phi_star));
    }
    else
    {
        c.phi = PolarizationAngle(rng.uniform(0.0, kPi));
    }
    return c;
}

Pulse bob_apply(Pulse pulse, BobChoice const& choice, int N)
{
    pulse.rotate_all(choice.phi.radians() + screening_radians(choice.b_index, N));
    return pulse;
}

BobTransform bob_transform(Pulse pulse, int N, double p_a, RandomSource& rng)
{
    require_fraction(p_a, "p_a");
    auto choice = bob_choose(N, p_a, rng);
    return {bob_apply(std::move(pulse), choice, N), choice};
}

EncodedPulse alice_encode(Pulse pulse, PolarizationAngle theta, Bit k,
                          int a_index, int N, double t, RandomSource& rng)
{
    require_fraction(t, "t");
    if (k > 1)
        throw ParameterError("alice_encode: k must be 0 or 1");
    pulse.rotate_all(-theta.radians() + encoding_sign_angle(k)
                     + screening_radians(a_index, N));

    auto split = beam_split(std::move(pulse), 1.0 - t, rng);
    EncodedPulse out;
    out.to_bob = std::move(split.passed);
    out.ad_clicks.reserve(split.tapped.size());
    for (auto& photon : split.tapped.photons)
    {
        auto origin = photon.origin;
        out.ad_clicks.push_back(
            {measure(std::move(photon), MeasurementBasis::diagonal(), rng),
             origin});
    }
    return out;
}

BobReadout bob_decode(Pulse pulse, PolarizationAngle phi, RandomSource& rng)
{
    BobReadout out;
    out.received = pulse.size();
    if (pulse.empty())
        return out;
    pulse.rotate_all(-phi.radians());
    std::optional<Bit> agreed;
    for (auto& photon : pulse.photons)
    {
        Bit b = measure(std::move(photon), MeasurementBasis::diagonal(), rng);
        if (!agreed)
            agreed = b;
        else if (*agreed != b)
            out.double_click = true;
    }
    if (!out.double_click)
        out.outcome = agreed;
    return out;
}

Announcement make_announcement(std::vector<RoundRecord> const& rounds)
{
    Announcement a;
    a.a_indices.reserve(rounds.size());
    a.b_indices.reserve(rounds.size());
    a.analyzing_flags.reserve(rounds.size());
    a.phi_star_values.reserve(rounds.size());
    for (auto const& r : rounds)
    {
        a.a_indices.push_back(r.a_index);
        a.b_indices.push_back(r.b_index);
        a.analyzing_flags.push_back(r.is_analyzing ? 1 : 0);
        a.phi_star_values.push_back(r.phi_star);
    }
    return a;
}

void sift_and_verify(SessionTranscript& transcript)
{
    auto const& ann = transcript.announcements;
    ann.validate();
    if (ann.rounds() != transcript.rounds.size())
    {
        throw ProtocolError("announcement covers "
                            + std::to_string(ann.rounds()) + " rounds, "
                            + "transcript has "
                            + std::to_string(transcript.rounds.size()));
    }

    int const N = transcript.params.N;
    transcript.alice_key.clear();
    transcript.bob_key.clear();
    transcript.integrity_checks = 0;
    transcript.integrity_violations = 0;

    for (std::size_t i = 0; i < transcript.rounds.size(); ++i)
    {
        auto const& round = transcript.rounds[i];
        if (!screening_matched(ann.a_indices[i], ann.b_indices[i], N))
            continue;
        if (ann.analyzing_flags[i])
        {
            Bit expected = integrity_expected_bit(round.k, *ann.phi_star_values[i]);
            for (auto const& click : round.ad_clicks)
            {
                ++transcript.integrity_checks;
                if (click.outcome != expected)
                    ++transcript.integrity_violations;
            }
            continue;
        }
        if (!round.bob_outcome)
            continue;
        transcript.alice_key.push_back(round.k);
        transcript.bob_key.push_back(static_cast<Bit>(*round.bob_outcome ^ 1u));
    }

    transcript.alice_hash = digest_key(transcript.alice_key, transcript.params.digest);
    transcript.bob_hash = digest_key(transcript.bob_key, transcript.params.digest);

    if (transcript.integrity_violations > 0)
        transcript.verdict = Verdict::IntegrityViolation;
    else if (transcript.alice_hash != transcript.bob_hash)
        transcript.verdict = Verdict::HashMismatch;
    else
        transcript.verdict = Verdict::Accepted;
}

SessionTranscript run_session(ProtocolParams const& params,
                              Interceptor* interceptor)
{
    params.validate();
    int const N = params.N;

    SessionTranscript transcript;
    transcript.params = params;
    transcript.rounds.reserve(params.rounds);

    for (RoundId r = 0; r < params.rounds; ++r)
    {
        auto alice_rng = round_source(params.seed, Stream::Alice, r);
        auto bob_rng = round_source(params.seed, Stream::Bob, r);
        auto channel_rng = round_source(params.seed, Stream::Channel, r);

        RoundRecord rec;
        rec.round_id = r;

        auto prepared = alice_prepare(params.source, alice_rng);
        rec.theta = prepared.theta;
        rec.k = alice_rng.bit();
        rec.a_index = alice_rng.uniform_int(1, N);
        prepared.pulse.round_id = r;

        auto pulse = transmit(std::move(prepared.pulse), Leg::Leg1_AliceToBob,
                              interceptor, params.loss, channel_rng);

        auto choice = bob_choose(N, params.p_a, bob_rng);
        rec.phi = choice.phi;
        rec.b_index = choice.b_index;
        rec.is_analyzing = choice.is_analyzing;
        rec.phi_star = choice.phi_star;
        pulse = bob_apply(std::move(pulse), choice, N);

        pulse = transmit(std::move(pulse), Leg::Leg2_BobToAlice, interceptor,
                         params.loss, channel_rng);

        auto encoded = alice_encode(std::move(pulse), rec.theta, rec.k,
                                    rec.a_index, N, params.t, alice_rng);
        rec.ad_clicks = std::move(encoded.ad_clicks);

        pulse = transmit(std::move(encoded.to_bob), Leg::Leg3_AliceToBob,
                         interceptor, params.loss, channel_rng);

        auto readout = bob_decode(std::move(pulse), rec.phi, bob_rng);
        rec.bob_outcome = readout.outcome;
        rec.bob_received_photons = readout.received;
        rec.bob_double_click = readout.double_click;

        transcript.rounds.push_back(std::move(rec));
    }

    PublicChannel board;
    board.attach_observer(interceptor);
    board.publish(make_announcement(transcript.rounds));
    transcript.announcements = *board.read_public();

    sift_and_verify(transcript);
    return transcript;
}

void write_transcript(SessionTranscript const& transcript, std::ostream& os)
{
    using nlohmann::json;
    json header = {{"type", "session"},
                   {"params", params_to_json(transcript.params)}};
    os << header.dump() << '\n';

    for (auto const& r : transcript.rounds)
    {
        json ad = json::array();
        for (auto const& c : r.ad_clicks)
            ad.push_back({c.outcome, static_cast<int>(c.origin)});
        json line = {
            {"type", "round"},
            {"id", r.round_id},
            {"theta", r.theta.radians()},
            {"phi", r.phi.radians()},
            {"analyzing", r.is_analyzing},
            {"phi_star", r.phi_star ? json(as_bit(*r.phi_star)) : json(nullptr)},
            {"a", r.a_index},
            {"b", r.b_index},
            {"k", r.k},
            {"ad", std::move(ad)},
            {"bob", r.bob_outcome ? json(*r.bob_outcome) : json(nullptr)},
            {"bob_photons", r.bob_received_photons},
            {"double_click", r.bob_double_click},
        };
        os << line.dump() << '\n';
    }

    json summary = {
        {"type", "summary"},
        {"alice_key_bits", transcript.alice_key.size()},
        {"bob_key_bits", transcript.bob_key.size()},
        {"alice_hash", to_hex(transcript.alice_hash)},
        {"bob_hash", to_hex(transcript.bob_hash)},
        {"integrity_checks", transcript.integrity_checks},
        {"integrity_violations", transcript.integrity_violations},
        {"verdict", std::string(to_string(transcript.verdict))},
    };
    os << summary.dump() << '\n';
}

}  // namespace sqkd

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "sqkd/errors.hpp"
#include "sqkd/protocol.hpp"

using namespace sqkd;
namespace orc = sqkd::oracle;

namespace {

ProtocolParams honest(int N, std::size_t rounds, std::uint64_t seed = 7)
{
    ProtocolParams p;
    p.N = N;
    p.rounds = rounds;
    p.seed = seed;
    return p;
}

double sigma(double p, double n) { return std::sqrt(p * (1 - p) / n); }

}  // namespace

TEST_CASE("screening angles")
{
    auto one = screening_angles(1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].radians() == doctest::Approx(orc::pi / 4));

    auto two = screening_angles(2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].radians() == doctest::Approx(orc::pi / 6));
    CHECK(two[1].radians() == doctest::Approx(orc::pi / 3));

    auto three = screening_angles(3);
    REQUIRE(three.size() == 3);
    CHECK(three[0].radians() == doctest::Approx(orc::pi / 8));
    CHECK(three[1].radians() == doctest::Approx(orc::pi / 4));
    CHECK(three[2].radians() == doctest::Approx(3 * orc::pi / 8));

    for (int N = 1; N <= 20; ++N)
    {
        auto s = screening_angles(N);
        for (int i = 1; i <= N; ++i)
        {
            CHECK(s[i - 1].radians() == doctest::Approx(orc::alpha(i, N)));
            CHECK(s[i - 1].radians() > 0.0);
            CHECK(s[i - 1].radians() < orc::pi / 2);
            if (i > 1)
                CHECK(s[i - 1].radians() > s[i - 2].radians());
            for (int j = 1; j <= N; ++j)
            {
                bool sums = std::abs(orc::alpha(i, N) + orc::alpha(j, N) - orc::pi / 2) < 1e-12;
                CHECK(screening_matched(i, j, N) == sums);
            }
        }
    }
    CHECK_THROWS_AS(screening_angles(0), ParameterError);
    CHECK_THROWS_AS(screening_angles(-3), ParameterError);
    CHECK_THROWS_AS(screening_radians(3, 2), ParameterError);
}

TEST_CASE("matched key round is deterministic for every encoding")
{
    RandomSource rng(101);
    for (int N : {1, 2, 3, 5})
        for (int a = 1; a <= N; ++a)
        {
            int b = N + 1 - a;
            for (Bit k : {Bit{0}, Bit{1}})
                for (int rep = 0; rep < 50; ++rep)
                {
                    double theta = rng.uniform(0, orc::pi);
                    double phi = rng.uniform(0, orc::pi);
                    Pulse p = make_single_photon(PolarizationAngle(theta));
                    BobChoice c{PolarizationAngle(phi), b, false, std::nullopt};
                    Pulse toward_alice = bob_apply(p, c, N);
                    // Bob's leg-2 photon sits at theta + phi + alpha_b
                    CHECK(toward_alice.photons[0].polarization.approx_equal(
                        PolarizationAngle(theta + phi + orc::alpha(b, N))));
                    auto enc = alice_encode(toward_alice, PolarizationAngle(theta), k, a, N, 1.0, rng);
                    CHECK(enc.ad_clicks.empty());
                    REQUIRE(enc.to_bob.size() == 1);
                    // phi + pi/2 + (-1)^k pi/4
                    CHECK(enc.to_bob.photons[0].polarization.approx_equal(
                        PolarizationAngle(phi + orc::pi / 2 + orc::sign_angle(k))));
                    auto r = bob_decode(enc.to_bob, c.phi, rng);
                    REQUIRE(r.outcome.has_value());
                    CHECK((*r.outcome ^ 1) == k);
                }
        }
}

TEST_CASE("matched analyzing round gives the integrity bit")
{
    RandomSource rng(103);
    for (int N : {1, 2, 4})
        for (int a = 1; a <= N; ++a)
            for (Bit k : {Bit{0}, Bit{1}})
                for (auto ps : {AnalyzingAngle::Zero, AnalyzingAngle::HalfPi})
                    for (int rep = 0; rep < 20; ++rep)
                    {
                        double theta = rng.uniform(0, orc::pi);
                        BobChoice c{PolarizationAngle(radians(ps)), N + 1 - a, true, ps};
                        Pulse p = bob_apply(make_single_photon(PolarizationAngle(theta)), c, N);
                        auto enc = alice_encode(p, PolarizationAngle(theta), k, a, N, 0.0, rng);
                        CHECK(enc.to_bob.empty());
                        REQUIRE(enc.ad_clicks.size() == 1);
                        CHECK(enc.ad_clicks[0].outcome == integrity_expected_bit(k, ps));
                        CHECK(integrity_expected_bit(k, ps) == (k ^ as_bit(ps) ^ 1));
                    }
}

TEST_CASE("full transmission leaves the analyzing detector dark")
{
    auto p = honest(2, 2000);
    p.t = 1.0;
    auto tr = run_session(p);
    for (auto const& r : tr.rounds)
        CHECK(r.ad_clicks.empty());
}

TEST_CASE("analyzing probability extremes")
{
    RandomSource rng(107);
    for (int i = 0; i < 2000; ++i)
    {
        auto never = bob_choose(3, 0.0, rng);
        CHECK_FALSE(never.is_analyzing);
        CHECK_FALSE(never.phi_star.has_value());
        auto always = bob_choose(3, 1.0, rng);
        CHECK(always.is_analyzing);
        REQUIRE(always.phi_star.has_value());
        CHECK(always.phi.approx_equal(PolarizationAngle(radians(*always.phi_star))));
    }
}

TEST_CASE("alice's theta is uniform (Kolmogorov-Smirnov)")
{
    RandomSource rng(109);
    int n = 20000;
    std::vector<double> xs;
    for (int i = 0; i < n; ++i)
        xs.push_back(alice_prepare(SourceModel::single_photon(), rng).theta.radians() / orc::pi);
    std::sort(xs.begin(), xs.end());
    double d = 0;
    for (int i = 0; i < n; ++i)
        d = std::max({d, std::abs((i + 1.0) / n - xs[i]), std::abs(xs[i] - double(i) / n)});
    // alpha = 0.001 critical value 1.95 / sqrt(n)
    CHECK(d < 1.95 / std::sqrt(double(n)));
}

TEST_CASE("vacuum decodes to no outcome")
{
    RandomSource rng(1);
    auto r = bob_decode(Pulse{}, PolarizationAngle(0.3), rng);
    CHECK_FALSE(r.outcome.has_value());
    CHECK(r.received == 0);
    CHECK_FALSE(r.double_click);
}

TEST_CASE("disagreeing photons are a double click")
{
    RandomSource rng(2);
    Pulse p;
    p.photons.push_back({PolarizationAngle(orc::pi / 4)});
    p.photons.push_back({PolarizationAngle(3 * orc::pi / 4)});
    auto r = bob_decode(p, PolarizationAngle(0.0), rng);
    CHECK(r.double_click);
    CHECK(r.received == 2);
    CHECK_FALSE(r.outcome.has_value());
}

TEST_CASE("matching probability is 1/N")
{
    for (int N : {1, 2, 3, 5, 10})
    {
        auto tr = run_session(honest(N, 20000, 1000 + N));
        double matched = 0;
        for (auto const& r : tr.rounds)
            matched += screening_matched(r.a_index, r.b_index, N);
        double rate = matched / tr.rounds.size();
        double p = 1.0 / N;
        if (N == 1)
            CHECK(rate == 1.0);
        else
            CHECK(std::abs(rate - p) <= 3 * sigma(p, tr.rounds.size()));
    }
}

TEST_CASE("honest session agrees")
{
    for (int N : {1, 2, 3})
    {
        auto tr = run_session(honest(N, 5000, 40 + N));
        CHECK(tr.alice_key == tr.bob_key);
        CHECK(tr.alice_hash == tr.bob_hash);
        CHECK(tr.integrity_violations == 0);
        CHECK(tr.integrity_checks > 0);
        CHECK(tr.verdict == Verdict::Accepted);
        CHECK(tr.alice_hash == digest_key(tr.alice_key, tr.params.digest));
    }
}

TEST_CASE("sifted key length follows M (1/N) (1 - p_a) t")
{
    auto p = honest(2, 50000, 77);
    auto tr = run_session(p);
    double q = 0.5 * (1 - p.p_a) * p.t;
    double n = double(p.rounds);
    CHECK(std::abs(tr.alice_key.size() - q * n) <= 3 * std::sqrt(n * q * (1 - q)));

    std::size_t expected = 0;
    for (auto const& r : tr.rounds)
        expected += screening_matched(r.a_index, r.b_index, p.N) && !r.is_analyzing
                    && r.bob_outcome.has_value();
    CHECK(tr.alice_key.size() == expected);
}

TEST_CASE("a flipped key bit is a hash mismatch")
{
    auto tr = run_session(honest(2, 3000, 5));
    REQUIRE_FALSE(tr.alice_key.empty());
    // flip Bob's outcome on the first key round
    for (auto& r : tr.rounds)
        if (screening_matched(r.a_index, r.b_index, 2) && !r.is_analyzing && r.bob_outcome)
        {
            r.bob_outcome = static_cast<Bit>(*r.bob_outcome ^ 1);
            break;
        }
    sift_and_verify(tr);
    CHECK(tr.alice_key != tr.bob_key);
    CHECK(tr.alice_hash != tr.bob_hash);
    CHECK(tr.verdict == Verdict::HashMismatch);
}

TEST_CASE("a bad AD click is an integrity violation")
{
    auto tr = run_session(honest(2, 3000, 6));
    for (auto& r : tr.rounds)
        if (screening_matched(r.a_index, r.b_index, 2) && r.is_analyzing && !r.ad_clicks.empty())
        {
            r.ad_clicks[0].outcome ^= 1;
            break;
        }
    sift_and_verify(tr);
    CHECK(tr.integrity_violations == 1);
    CHECK(tr.verdict == Verdict::IntegrityViolation);
}

TEST_CASE("inconsistent announcement is rejected")
{
    auto tr = run_session(honest(2, 100, 8));
    tr.announcements.a_indices.pop_back();
    CHECK_THROWS_AS(sift_and_verify(tr), ProtocolError);

    auto tr2 = run_session(honest(2, 100, 8));
    tr2.rounds.pop_back();
    CHECK_THROWS_AS(sift_and_verify(tr2), ProtocolError);
}

TEST_CASE("AD outcomes carry no information about k in an honest run")
{
    auto p = honest(2, 60000, 9);
    p.p_a = 0.5;
    auto tr = run_session(p);
    // AD clicks on non-analyzing or unmatched rounds: outcome vs k
    double n[2] = {0, 0}, ones[2] = {0, 0};
    for (auto const& r : tr.rounds)
    {
        if (screening_matched(r.a_index, r.b_index, 2) && r.is_analyzing)
            continue;
        for (auto const& c : r.ad_clicks)
        {
            n[r.k] += 1;
            ones[r.k] += c.outcome;
        }
    }
    REQUIRE(n[0] > 500);
    REQUIRE(n[1] > 500);
    double f0 = ones[0] / n[0], f1 = ones[1] / n[1];
    double s = std::sqrt(0.25 / n[0] + 0.25 / n[1]);
    CHECK(std::abs(f0 - f1) < 4 * s);
}

TEST_CASE("round records are consistent with the announcement")
{
    auto p = honest(3, 2000, 10);
    p.source = SourceModel::poisson(1.5);
    auto tr = run_session(p);
    REQUIRE(tr.rounds.size() == p.rounds);
    CHECK(tr.announcements == make_announcement(tr.rounds));
    for (std::size_t i = 0; i < tr.rounds.size(); ++i)
    {
        auto const& r = tr.rounds[i];
        CHECK(r.round_id == i);
        CHECK(r.a_index >= 1);
        CHECK(r.a_index <= 3);
        CHECK(r.is_analyzing == r.phi_star.has_value());
        CHECK(r.bob_outcome.has_value() == (r.bob_received_photons >= 1 && !r.bob_double_click));
        for (auto const& c : r.ad_clicks)
            CHECK(c.origin == Origin::Legitimate);
    }
    CHECK(tr.verdict == Verdict::Accepted);
}

TEST_CASE("parameter validation")
{
    auto p = honest(2, 10);
    p.p_a = 1.2;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = honest(0, 10);
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = honest(2, 10);
    p.t = -0.1;
    CHECK_THROWS_AS(run_session(p), ParameterError);
}

TEST_CASE("transcript is line-delimited JSON")
{
    auto tr = run_session(honest(2, 50, 12));
    std::ostringstream os;
    write_transcript(tr, os);
    std::istringstream is(os.str());
    std::string line;
    std::vector<nlohmann::json> lines;
    while (std::getline(is, line))
        lines.push_back(nlohmann::json::parse(line));
    REQUIRE(lines.size() == 52);
    CHECK(lines.front()["type"] == "session");
    CHECK(lines.front()["params"]["N"] == 2);
    CHECK(lines[1]["type"] == "round");
    CHECK(lines[1]["id"] == 0);
    CHECK(lines.back()["type"] == "summary");
    CHECK(lines.back()["verdict"] == "Accepted");
    CHECK(lines.back()["alice_hash"] == to_hex(tr.alice_hash));
}

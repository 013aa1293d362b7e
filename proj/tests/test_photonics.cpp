#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sqkd/digest.hpp"
#include "sqkd/errors.hpp"
#include "sqkd/photonics.hpp"

using namespace sqkd;
namespace orc = sqkd::oracle;

TEST_CASE("rotation examples")
{
    CHECK(rotate(PolarizationAngle(0.3), 0.5).radians() == doctest::Approx(0.8).epsilon(1e-12));
    auto r = rotate(PolarizationAngle(2.9), 0.5);
    CHECK(r.radians() == doctest::Approx(orc::canon(3.4)).epsilon(1e-12));
    CHECK(r.radians() == doctest::Approx(0.258407346410207).epsilon(1e-12));
    CHECK(PolarizationAngle(-0.1).radians() == doctest::Approx(orc::canon(-0.1)));
    CHECK(PolarizationAngle(orc::pi).radians() == doctest::Approx(0.0));
}

TEST_CASE("rotations compose and are invertible")
{
    RandomSource rng(11);
    for (int i = 0; i < 1000; ++i)
    {
        PolarizationAngle s(rng.uniform(-10, 10));
        double a = rng.uniform(-7, 7), b = rng.uniform(-7, 7);
        CHECK(rotate(rotate(s, a), b).approx_equal(rotate(s, a + b)));
        CHECK(rotate(rotate(s, a), -a).approx_equal(s));
        CHECK(rotate(s, orc::pi).approx_equal(s));
        double v = s.radians();
        CHECK(v >= 0.0);
        CHECK(v < orc::pi);
    }
}

TEST_CASE("deterministic measurements")
{
    RandomSource rng(3);
    for (int i = 0; i < 200; ++i)
    {
        CHECK(measure({PolarizationAngle(orc::pi / 4)}, MeasurementBasis::diagonal(), rng) == 0);
        CHECK(measure({PolarizationAngle(3 * orc::pi / 4)}, MeasurementBasis::diagonal(), rng) == 1);
        // float residue from a chain of rotations still snaps
        auto p = PolarizationAngle(0.1).rotated(orc::pi / 4 - 0.1 + 1e-13);
        CHECK(measure({p}, MeasurementBasis::diagonal(), rng) == 0);
    }
}

TEST_CASE("unbiased measurement at zero")
{
    RandomSource rng(5);
    int n = 100000, ones = 0;
    for (int i = 0; i < n; ++i)
        ones += measure({PolarizationAngle(0.0)}, MeasurementBasis::diagonal(), rng);
    CHECK(std::abs(ones / double(n) - 0.5) < 0.01);
}

TEST_CASE("Born rule chi-square over sampled angles")
{
    RandomSource rng(17);
    constexpr int angles = 16, samples = 10000;
    double chi2 = 0.0;
    for (int a = 0; a < angles; ++a)
    {
        double state = (a + 0.37) * orc::pi / angles;
        double axis = 0.2;
        double p = orc::p0(state, axis);
        int zeros = 0;
        for (int s = 0; s < samples; ++s)
            zeros += measure({PolarizationAngle(state)}, MeasurementBasis(axis), rng) == 0;
        double e0 = p * samples, e1 = (1 - p) * samples;
        if (e0 > 0)
            chi2 += (zeros - e0) * (zeros - e0) / e0;
        if (e1 > 0)
            chi2 += ((samples - zeros) - e1) * ((samples - zeros) - e1) / e1;
    }
    // 16 dof; 0.999 quantile is about 39.25
    CHECK(chi2 < 39.25);
}

TEST_CASE("outcome probabilities sum to one")
{
    RandomSource rng(1);
    for (int i = 0; i < 500; ++i)
    {
        PolarizationAngle s(rng.uniform(0, 4));
        MeasurementBasis b(rng.uniform(0, 4));
        double total = aligned_probability(s, b.axis()) + aligned_probability(s, b.orthogonal_axis());
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pulse preparation")
{
    RandomSource rng(23);
    for (int i = 0; i < 100; ++i)
        CHECK(make_pulse(PolarizationAngle(0.4), 0.0, rng).empty());

    double total = 0;
    int n = 100000;
    for (int i = 0; i < n; ++i)
    {
        auto p = make_pulse(PolarizationAngle(0.4), 2.0, rng);
        total += p.size();
        for (auto const& ph : p.photons)
        {
            CHECK(ph.polarization.approx_equal(PolarizationAngle(0.4)));
            CHECK(ph.origin == Origin::Legitimate);
        }
    }
    CHECK(std::abs(total / n - 2.0) < 0.05);
    CHECK_THROWS_AS(make_pulse(PolarizationAngle(0.0), -1.0, rng), ParameterError);

    auto one = prepare(PolarizationAngle(1.0), SourceModel::single_photon(), rng);
    CHECK(one.size() == 1);
}

TEST_CASE("beam splitter")
{
    RandomSource rng(29);
    Pulse p;
    for (int i = 0; i < 5; ++i)
        p.photons.push_back({PolarizationAngle(0.1 * i)});

    auto none = beam_split(p, 0.0, rng);
    CHECK(none.tapped.empty());
    CHECK(none.passed.size() == 5);
    auto all = beam_split(p, 1.0, rng);
    CHECK(all.tapped.size() == 5);
    CHECK(all.passed.empty());

    Pulse big;
    for (int i = 0; i < 100000; ++i)
        big.photons.push_back({PolarizationAngle(0.0), i % 2 ? Origin::TrojanInjected : Origin::Legitimate});
    auto s = beam_split(big, 0.3, rng);
    CHECK(std::abs(double(s.tapped.size()) - 30000.0) < 450.0);
    CHECK(s.tapped.size() + s.passed.size() == 100000);

    // routing ignores origin
    std::size_t trojan_tapped = 0;
    for (auto const& ph : s.tapped.photons)
        trojan_tapped += ph.origin == Origin::TrojanInjected;
    double sigma = std::sqrt(s.tapped.size() * 0.25);
    CHECK(std::abs(double(trojan_tapped) - s.tapped.size() / 2.0) < 4 * sigma);

    CHECK_THROWS_AS(beam_split(p, 1.5, rng), ParameterError);
    CHECK_THROWS_AS(beam_split(p, -0.1, rng), ParameterError);
}

TEST_CASE("even splitter conserves photons")
{
    RandomSource rng(31);
    Pulse p;
    for (int i = 0; i < 30000; ++i)
        p.photons.push_back({PolarizationAngle(0.0)});
    auto parts = split_evenly(p, 3, rng);
    REQUIRE(parts.size() == 3);
    std::size_t sum = 0;
    for (auto const& part : parts)
    {
        sum += part.size();
        CHECK(std::abs(double(part.size()) - 10000.0) < 4 * std::sqrt(30000 * (1.0 / 3) * (2.0 / 3)));
    }
    CHECK(sum == 30000);
}

TEST_CASE("random streams are reproducible and distinct")
{
    RandomSource a(99), b(99);
    for (int i = 0; i < 10; ++i)
        CHECK(a.engine()() == b.engine()());
    auto c = RandomSource(99).split(1), d = RandomSource(99).split(2);
    CHECK(c.seed() != d.seed());
}

TEST_CASE("bit packing and digests")
{
    BitString bits{1, 0, 1, 1, 0, 0, 0, 0, 1};
    auto packed = pack_bits(bits);
    REQUIRE(packed.size() == 2);
    CHECK(packed[0] == 0xB0);
    CHECK(packed[1] == 0x80);
    // SHA-256 of the empty string
    CHECK(to_hex(digest_key({}, DigestAlgorithm::Sha256))
          == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    // SHA3-256 of the empty string
    CHECK(to_hex(digest_key({}, DigestAlgorithm::Sha3_256))
          == "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a");
    // one byte 0x61 = "a"
    BitString a{0, 1, 1, 0, 0, 0, 0, 1};
    CHECK(to_hex(digest_key(a, DigestAlgorithm::Sha256))
          == "ca978112ca1bbdcafac231b39a23dc4da786eff8147c4e72b9807785afee48bb");
    CHECK(parse_digest_algorithm("sha3-256") == DigestAlgorithm::Sha3_256);
    CHECK(to_string(DigestAlgorithm::Sha256) == "sha256");
}

#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "sqkd/analysis.hpp"
#include "sqkd/errors.hpp"

using namespace sqkd;
namespace orc = sqkd::oracle;

TEST_CASE("screening error sum")
{
    CHECK(ie_sum(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ie_sum(2) == doctest::Approx(1.0).epsilon(1e-12));
    for (int N = 1; N <= 64; ++N)
    {
        CHECK(std::abs(ie_sum(N) - N / 2.0) < 1e-12);
        CHECK(std::abs(ie_sum(N) - orc::ie_sum(N)) < 1e-12);
        CHECK(std::abs(ie_mean(N) - 0.5) < 1e-12);
    }
    CHECK_THROWS_AS(ie_sum(0), ParameterError);
}

TEST_CASE("rates are absent without samples")
{
    MetricTotals t;
    CHECK_FALSE(qber(t).has_value());
    CHECK_FALSE(ad_violation_rate(t).has_value());
    CHECK_FALSE(eve_accuracy(t).has_value());
    CHECK_FALSE(sift_rate(t).has_value());
    CHECK_FALSE(conclusive_rate(t).has_value());
    t.sifted_bits = 4;
    t.bit_errors = 1;
    CHECK(*qber(t) == doctest::Approx(0.25));
    CHECK(binomial_sigma(0.5, 0) == 0.0);
    CHECK(binomial_sigma(0.5, 100) == doctest::Approx(0.05));
    CHECK(matching_probability(4) == 0.25);
}

TEST_CASE("aggregation is order independent")
{
    std::mt19937 gen(3);
    std::vector<TrialMetrics> rows;
    for (std::size_t i = 0; i < 20; ++i)
    {
        TrialMetrics m;
        m.trial = i;
        m.N = 2;
        m.rounds = 1000;
        m.matched = gen() % 1000;
        m.sifted_bits = gen() % 500;
        m.bit_errors = gen() % 10;
        m.ad_clicks = gen() % 50;
        m.verdict = static_cast<Verdict>(gen() % 3);
        rows.push_back(m);
    }
    auto a = aggregate(rows);
    std::shuffle(rows.begin(), rows.end(), gen);
    auto b = aggregate(rows);
    CHECK(a.trials == 20);
    CHECK(a.matched == b.matched);
    CHECK(a.sifted_bits == b.sifted_bits);
    CHECK(a.bit_errors == b.bit_errors);
    CHECK(a.ad_clicks == b.ad_clicks);
    CHECK(a.accepted == b.accepted);
    CHECK(a.accepted + a.hash_mismatch + a.integrity_violation == 20);
}

TEST_CASE("trial metrics from an honest session")
{
    ProtocolParams p;
    p.rounds = 4000;
    p.seed = 21;
    auto tr = run_session(p);
    auto m = measure_trial(tr, {}, 3);
    CHECK(m.trial == 3);
    CHECK(m.rounds == 4000);
    CHECK(m.sifted_bits == tr.alice_key.size());
    CHECK(m.bit_errors == 0);
    CHECK(m.ad_violations == 0);
    CHECK(m.eve_guesses == 0);
    CHECK(*qber(tr) == 0.0);
    CHECK(m.verdict == Verdict::Accepted);
}

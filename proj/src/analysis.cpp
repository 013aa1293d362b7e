#include "sqkd/analysis.hpp"

#include <cmath>
#include <string>

#include "sqkd/errors.hpp"

namespace sqkd {

TrialMetrics measure_trial(SessionTranscript const& transcript,
                           std::span<EveRoundReport const> eve,
                           std::size_t trial)
{
    auto const& ann = transcript.announcements;
    ann.validate();
    if (ann.rounds() != transcript.rounds.size())
        throw ProtocolError("measure_trial: announcement/round count mismatch");

    TrialMetrics m;
    m.trial = trial;
    m.N = transcript.params.N;
    m.rounds = transcript.rounds.size();
    m.verdict = transcript.verdict;

    for (std::size_t i = 0; i < transcript.rounds.size(); ++i)
    {
        auto const& r = transcript.rounds[i];
        EveRoundReport const* e = i < eve.size() ? &eve[i] : nullptr;

        if (r.bob_double_click)
            ++m.double_clicks;
        if (e && e->readout_attempted)
        {
            ++m.readout_attempts;
            if (e->conclusive)
                ++m.readout_conclusive;
        }

        if (!screening_matched(ann.a_indices[i], ann.b_indices[i], m.N))
            continue;
        ++m.matched;

        if (ann.analyzing_flags[i])
        {
            Bit expected = integrity_expected_bit(r.k, *ann.phi_star_values[i]);
            for (auto const& click : r.ad_clicks)
            {
                bool violated = click.outcome != expected;
                ++m.ad_clicks;
                m.ad_violations += violated;
                if (click.origin != Origin::Legitimate)
                {
                    ++m.injected_ad_clicks;
                    m.injected_ad_violations += violated;
                }
            }
            if (e && e->guess)
            {
                ++m.eve_analyzing_guesses;
                m.eve_analyzing_correct += *e->guess == r.k;
            }
            continue;
        }

        if (!r.bob_outcome)
            continue;
        ++m.sifted_bits;
        m.bit_errors += static_cast<Bit>(*r.bob_outcome ^ 1u) != r.k;
        if (e && e->guess)
        {
            bool correct = *e->guess == r.k;
            ++m.eve_guesses;
            m.eve_correct += correct;
            if (e->captured_injected)
            {
                ++m.eve_probe_guesses;
                m.eve_probe_correct += correct;
            }
        }
    }
    return m;
}

void MetricTotals::add(TrialMetrics const& m)
{
    ++trials;
    rounds += m.rounds;
    matched += m.matched;
    sifted_bits += m.sifted_bits;
    bit_errors += m.bit_errors;
    ad_clicks += m.ad_clicks;
    ad_violations += m.ad_violations;
    injected_ad_clicks += m.injected_ad_clicks;
    injected_ad_violations += m.injected_ad_violations;
    eve_guesses += m.eve_guesses;
    eve_correct += m.eve_correct;
    eve_probe_guesses += m.eve_probe_guesses;
    eve_probe_correct += m.eve_probe_correct;
    eve_analyzing_guesses += m.eve_analyzing_guesses;
    eve_analyzing_correct += m.eve_analyzing_correct;
    readout_attempts += m.readout_attempts;
    readout_conclusive += m.readout_conclusive;
    double_clicks += m.double_clicks;
    switch (m.verdict)
    {
    case Verdict::Accepted: ++accepted; break;
    case Verdict::HashMismatch: ++hash_mismatch; break;
    case Verdict::IntegrityViolation: ++integrity_violation; break;
    }
}

MetricTotals aggregate(std::span<TrialMetrics const> trials)
{
    MetricTotals t;
    for (auto const& m : trials)
        t.add(m);
    return t;
}

std::optional<double> ratio(std::size_t num, std::size_t den) noexcept
{
    if (den == 0)
        return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> sift_rate(MetricTotals const& t) noexcept
{
    return ratio(t.matched, t.rounds);
}

std::optional<double> qber(MetricTotals const& t) noexcept
{
    return ratio(t.bit_errors, t.sifted_bits);
}

std::optional<double> qber(SessionTranscript const& transcript)
{
    auto m = measure_trial(transcript, {}, 0);
    return ratio(m.bit_errors, m.sifted_bits);
}

std::optional<double> ad_violation_rate(MetricTotals const& t) noexcept
{
    return ratio(t.ad_violations, t.ad_clicks);
}

std::optional<double> injected_ad_violation_rate(MetricTotals const& t) noexcept
{
    return ratio(t.injected_ad_violations, t.injected_ad_clicks);
}

std::optional<double> eve_accuracy(MetricTotals const& t) noexcept
{
    return ratio(t.eve_correct, t.eve_guesses);
}

std::optional<double> eve_probe_accuracy(MetricTotals const& t) noexcept
{
    return ratio(t.eve_probe_correct, t.eve_probe_guesses);
}

std::optional<double> eve_analyzing_accuracy(MetricTotals const& t) noexcept
{
    return ratio(t.eve_analyzing_correct, t.eve_analyzing_guesses);
}

std::optional<double> conclusive_rate(MetricTotals const& t) noexcept
{
    return ratio(t.readout_conclusive, t.readout_attempts);
}

double ie_sum(int N)
{
    if (N < 1)
        throw ParameterError("ie_sum: N must be >= 1, got " + std::to_string(N));
    double sum = 0.0;
    for (int i = 1; i <= N; ++i)
    {
        double s = std::sin(screening_radians(i, N) - kHalfPi);
        sum += s * s;
    }
    return sum;
}

double ie_mean(int N) { return ie_sum(N) / N; }

double binomial_sigma(double p, std::size_t n) noexcept
{
    if (n == 0)
        return 0.0;
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace sqkd

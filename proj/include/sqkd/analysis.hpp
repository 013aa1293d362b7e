#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sqkd/channel.hpp"
#include "sqkd/protocol.hpp"

namespace sqkd {

/// Raw counts for one session. Every rate is derived from these, so
/// aggregation is a plain sum and independent of trial order.
struct TrialMetrics
{
    std::size_t trial = 0;
    int N = 0;
    std::size_t rounds = 0;
    std::size_t matched = 0;

    // Matched, non-analyzing rounds with a Bob detection.
    std::size_t sifted_bits = 0;
    std::size_t bit_errors = 0;

    // AD clicks on matched analyzing rounds.
    std::size_t ad_clicks = 0;
    std::size_t ad_violations = 0;
    // Subset of the above whose photon was injected by the adversary.
    std::size_t injected_ad_clicks = 0;
    std::size_t injected_ad_violations = 0;

    // Eve's guesses scored against k on sifted key rounds.
    std::size_t eve_guesses = 0;
    std::size_t eve_correct = 0;
    // ... restricted to rounds where she recovered her own probe.
    std::size_t eve_probe_guesses = 0;
    std::size_t eve_probe_correct = 0;
    // ... on matched analyzing rounds (no key bit, phi public).
    std::size_t eve_analyzing_guesses = 0;
    std::size_t eve_analyzing_correct = 0;

    std::size_t readout_attempts = 0;
    std::size_t readout_conclusive = 0;

    std::size_t double_clicks = 0;
    Verdict verdict = Verdict::Accepted;

    friend bool operator==(TrialMetrics const&, TrialMetrics const&) = default;
};

TrialMetrics measure_trial(SessionTranscript const& transcript,
                           std::span<EveRoundReport const> eve,
                           std::size_t trial = 0);

/// Summed counts over trials plus a verdict histogram.
struct MetricTotals
{
    std::size_t trials = 0;
    std::size_t rounds = 0;
    std::size_t matched = 0;
    std::size_t sifted_bits = 0;
    std::size_t bit_errors = 0;
    std::size_t ad_clicks = 0;
    std::size_t ad_violations = 0;
    std::size_t injected_ad_clicks = 0;
    std::size_t injected_ad_violations = 0;
    std::size_t eve_guesses = 0;
    std::size_t eve_correct = 0;
    std::size_t eve_probe_guesses = 0;
    std::size_t eve_probe_correct = 0;
    std::size_t eve_analyzing_guesses = 0;
    std::size_t eve_analyzing_correct = 0;
    std::size_t readout_attempts = 0;
    std::size_t readout_conclusive = 0;
    std::size_t double_clicks = 0;
    std::size_t accepted = 0;
    std::size_t hash_mismatch = 0;
    std::size_t integrity_violation = 0;

    void add(TrialMetrics const& m);
};

MetricTotals aggregate(std::span<TrialMetrics const> trials);

/// Ratio, or nullopt for an empty denominator.
std::optional<double> ratio(std::size_t num, std::size_t den) noexcept;

/// Matched fraction of all rounds.
std::optional<double> sift_rate(MetricTotals const& t) noexcept;
/// Bit disagreements among sifted bits; absent with no sifted bits.
std::optional<double> qber(MetricTotals const& t) noexcept;
std::optional<double> qber(SessionTranscript const& transcript);
/// AD clicks on matched analyzing rounds that violate the integrity
/// condition; absent with no such clicks.
std::optional<double> ad_violation_rate(MetricTotals const& t) noexcept;
/// Same, restricted to adversary-injected photons (diagnostic).
std::optional<double> injected_ad_violation_rate(MetricTotals const& t) noexcept;
std::optional<double> eve_accuracy(MetricTotals const& t) noexcept;
std::optional<double> eve_probe_accuracy(MetricTotals const& t) noexcept;
std::optional<double> eve_analyzing_accuracy(MetricTotals const& t) noexcept;
std::optional<double> conclusive_rate(MetricTotals const& t) noexcept;

/// Sum over the screening set of sin^2(alpha_i - pi/2). Throws
/// ParameterError for N < 1.
double ie_sum(int N);
double ie_mean(int N);

inline double matching_probability(int N) { return 1.0 / N; }

/// Standard deviation of a binomial proportion with success probability p
/// over n trials.
double binomial_sigma(double p, std::size_t n) noexcept;

}  // namespace sqkd

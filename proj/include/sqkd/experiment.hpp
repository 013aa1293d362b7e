#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqkd/adversary.hpp"
#include "sqkd/analysis.hpp"
#include "sqkd/protocol.hpp"

namespace sqkd {

/// Everything needed to reproduce a run. `protocol.seed` is ignored; each
/// session seed is derived from `seed`, the screening-set size and the
/// trial index.
struct ExperimentConfig
{
    ProtocolParams protocol;
    /// Sweep over screening-set sizes; empty means just protocol.N.
    std::vector<int> N_values;
    AttackConfig attack;
    std::size_t trials = 1;
    std::uint64_t seed = 7;
    unsigned threads = 1;

    std::string output_dir = ".";
    std::string report_name = "report";
    std::optional<std::string> transcript_path;

    /// Statistical tolerance in binomial standard deviations.
    double sigma = 3.0;
    bool assertions = true;

    std::vector<int> n_values() const;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Photon mode used when the config does not name one: pulse mode for the
/// multi-photon strategies, single-photon otherwise.
PhotonMode default_mode_for(AttackKind kind) noexcept;

nlohmann::json config_to_json(ExperimentConfig const& config);
/// Missing keys keep their defaults; unknown keys and bad values throw
/// ConfigError.
ExperimentConfig config_from_json(nlohmann::json const& j,
                                  ExperimentConfig base = {});

/// Session seed for (root seed, N, trial).
std::uint64_t session_seed(std::uint64_t root, int N, std::size_t trial);

struct TrialResult
{
    TrialMetrics metrics;
    SessionTranscript transcript;
    std::vector<EveRoundReport> eve;
};

/// Run one session of the experiment at screening-set size N.
TrialResult run_trial(ExperimentConfig const& config, int N, std::size_t trial);

struct ExperimentReport
{
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::size_t rounds_per_trial = 0;
    std::string mode;
    std::string attack;
    /// One row per (N, trial), ordered by N then trial.
    std::vector<TrialMetrics> rows;

    std::vector<int> n_values() const;
    MetricTotals totals_for(int N) const;

    friend bool operator==(ExperimentReport const&, ExperimentReport const&) = default;
};

/// Run every (N, trial) session, fanned out over `config.threads`
/// workers. Output is independent of scheduling. If `transcripts` is
/// non-null, each session's audit record is appended to it in row order.
ExperimentReport run_experiment(ExperimentConfig const& config,
                                std::string* transcripts = nullptr);

/// Built-in run checks: an honest run must show zero QBER, zero integrity
/// violations and only Accepted verdicts; every run must follow the 1/N
/// matching law; an attacked run must be visible in QBER or AD violations
/// unless Eve's accuracy stays at chance. Returns one message per failure.
std::vector<std::string> failed_assertions(ExperimentConfig const& config,
                                           ExperimentReport const& report);

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json report_to_json(ExperimentReport const& report);
ExperimentReport report_from_json(nlohmann::json const& j);

/// Flat table, one row per (trial, N), fixed column order.
std::string report_to_csv(ExperimentReport const& report);

/// Write `<base>.json` and `<base>.csv`. Throws std::runtime_error naming
/// the path on I/O failure.
void emit_report(ExperimentReport const& report, std::string const& base_path);

struct SecurityPoint
{
    int N = 0;
    double sift_rate = 0.0;
    std::optional<double> qber_under_attack;
    std::optional<double> conclusive_rate;
    std::optional<double> ad_violation_rate;
    /// |sift_rate - 1/N| within the configured number of sigmas.
    bool sift_law_ok = false;

    friend bool operator==(SecurityPoint const&, SecurityPoint const&) = default;
};

struct SecurityCurve
{
    std::string attack;
    std::vector<SecurityPoint> points;  // N strictly increasing
};

SecurityCurve curve_from_report(ExperimentReport const& report, double sigma);

/// Run `base` at each N (strictly increasing, each >= 1) and collect the
/// curve. Throws ParameterError for a bad N list.
SecurityCurve security_curve(ExperimentConfig base, std::span<int const> N_values);

/// Write `<base>_curve.json` and `<base>_curve.csv`.
void emit_curve(SecurityCurve const& curve, std::string const& base_path);

}  // namespace sqkd

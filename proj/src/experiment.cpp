#include "sqkd/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <initializer_list>
#include <mutex>
#include <sstream>
#include <string_view>
#include <thread>
#include <type_traits>

#include "sqkd/errors.hpp"
#include "sqkd/json_io.hpp"

namespace sqkd {

using nlohmann::json;

namespace {

void check_keys(json const& obj, std::string const& where,
                std::initializer_list<std::string_view> allowed)
{
    if (!obj.is_object())
        throw ConfigError(where.empty() ? "config" : where, "must be an object");
    for (auto const& [key, _] : obj.items())
    {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(where.empty() ? key : where + "." + key,
                              "unknown key");
    }
}

template <class T>
void read(json const& obj, char const* key, std::string const& field, T& dst)
{
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>)
    {
        if (!it->is_number_unsigned())
            throw ConfigError(field, "must be a non-negative integer");
    }
    try
    {
        dst = it->get<T>();
    }
    catch (json::exception const& e)
    {
        throw ConfigError(field, std::string("wrong type: ") + e.what());
    }
}

std::string format_double(double v)
{
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::string format_optional(std::optional<double> v)
{
    return v ? format_double(*v) : std::string();
}

json optional_json(std::optional<double> v)
{
    return v ? json(*v) : json(nullptr);
}

json metrics_to_json(TrialMetrics const& m)
{
    return {
        {"trial", m.trial},
        {"N", m.N},
        {"rounds", m.rounds},
        {"matched", m.matched},
        {"sifted_bits", m.sifted_bits},
        {"bit_errors", m.bit_errors},
        {"ad_clicks", m.ad_clicks},
        {"ad_violations", m.ad_violations},
        {"injected_ad_clicks", m.injected_ad_clicks},
        {"injected_ad_violations", m.injected_ad_violations},
        {"eve_guesses", m.eve_guesses},
        {"eve_correct", m.eve_correct},
        {"eve_probe_guesses", m.eve_probe_guesses},
        {"eve_probe_correct", m.eve_probe_correct},
        {"eve_analyzing_guesses", m.eve_analyzing_guesses},
        {"eve_analyzing_correct", m.eve_analyzing_correct},
        {"readout_attempts", m.readout_attempts},
        {"readout_conclusive", m.readout_conclusive},
        {"double_clicks", m.double_clicks},
        {"verdict", std::string(to_string(m.verdict))},
    };
}

Verdict parse_verdict(std::string const& s)
{
    for (auto v : {Verdict::Accepted, Verdict::HashMismatch,
                   Verdict::IntegrityViolation})
    {
        if (s == to_string(v))
            return v;
    }
    throw ProtocolError("unknown verdict '" + s + "'");
}

TrialMetrics metrics_from_json(json const& j)
{
    TrialMetrics m;
    m.trial = j.at("trial").get<std::size_t>();
    m.N = j.at("N").get<int>();
    m.rounds = j.at("rounds").get<std::size_t>();
    m.matched = j.at("matched").get<std::size_t>();
    m.sifted_bits = j.at("sifted_bits").get<std::size_t>();
    m.bit_errors = j.at("bit_errors").get<std::size_t>();
    m.ad_clicks = j.at("ad_clicks").get<std::size_t>();
    m.ad_violations = j.at("ad_violations").get<std::size_t>();
    m.injected_ad_clicks = j.at("injected_ad_clicks").get<std::size_t>();
    m.injected_ad_violations = j.at("injected_ad_violations").get<std::size_t>();
    m.eve_guesses = j.at("eve_guesses").get<std::size_t>();
    m.eve_correct = j.at("eve_correct").get<std::size_t>();
    m.eve_probe_guesses = j.at("eve_probe_guesses").get<std::size_t>();
    m.eve_probe_correct = j.at("eve_probe_correct").get<std::size_t>();
    m.eve_analyzing_guesses = j.at("eve_analyzing_guesses").get<std::size_t>();
    m.eve_analyzing_correct = j.at("eve_analyzing_correct").get<std::size_t>();
    m.readout_attempts = j.at("readout_attempts").get<std::size_t>();
    m.readout_conclusive = j.at("readout_conclusive").get<std::size_t>();
    m.double_clicks = j.at("double_clicks").get<std::size_t>();
    m.verdict = parse_verdict(j.at("verdict").get<std::string>());
    return m;
}

void write_file(std::string const& path, std::string const& content)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    os << content;
    os.flush();
    if (!os)
        throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

std::vector<int> ExperimentConfig::n_values() const
{
    if (N_values.empty())
        return {protocol.N};
    return N_values;
}

void ExperimentConfig::validate() const
{
    try
    {
        ProtocolParams p = protocol;
        for (int n : n_values())
        {
            if (n < 1)
                throw ConfigError("protocol.N", "must be >= 1");
            p.N = n;
            p.validate();
            attack.validate(p);
        }
    }
    catch (ParameterError const& e)
    {
        throw ConfigError("protocol", e.what());
    }
    auto ns = n_values();
    for (std::size_t i = 1; i < ns.size(); ++i)
    {
        if (ns[i] <= ns[i - 1])
            throw ConfigError("protocol.N_values", "must be strictly increasing");
    }
    if (trials < 1)
        throw ConfigError("trials", "must be >= 1");
    if (threads < 1)
        throw ConfigError("threads", "must be >= 1");
    if (!(sigma > 0.0))
        throw ConfigError("tolerance.sigma", "must be > 0");
    if (report_name.empty())
        throw ConfigError("output.report", "must be non-empty");
}

json config_to_json(ExperimentConfig const& c)
{
    json protocol = params_to_json(c.protocol);
    protocol.erase("seed");
    protocol["N_values"] = c.n_values();
    json attack = {
        {"name", std::string(to_string(c.attack.kind))},
        {"tap_fraction", c.attack.tap_fraction},
        {"eta", c.attack.eta},
        {"attack_probability", c.attack.attack_probability},
        {"guess_index", c.attack.fixed_guess_index
                            ? json(*c.attack.fixed_guess_index)
                            : json(nullptr)},
    };
    return {
        {"protocol", protocol},
        {"attack", attack},
        {"trials", c.trials},
        {"seed", c.seed},
        {"threads", c.threads},
        {"output", {{"dir", c.output_dir},
                    {"report", c.report_name},
                    {"transcript", c.transcript_path ? json(*c.transcript_path)
                                                     : json(nullptr)}}},
        {"tolerance", {{"sigma", c.sigma}}},
        {"assertions", c.assertions},
    };
}

ExperimentConfig config_from_json(json const& j, ExperimentConfig c)
{
    check_keys(j, "", {"protocol", "attack", "trials", "seed", "threads",
                       "output", "tolerance", "assertions"});

    bool mode_given = false;
    if (auto it = j.find("protocol"); it != j.end())
    {
        auto const& p = *it;
        check_keys(p, "protocol", {"N", "N_values", "rounds", "p_a", "t", "mode",
                                   "mu", "loss", "digest"});
        read(p, "N", "protocol.N", c.protocol.N);
        read(p, "N_values", "protocol.N_values", c.N_values);
        read(p, "rounds", "protocol.rounds", c.protocol.rounds);
        read(p, "p_a", "protocol.p_a", c.protocol.p_a);
        read(p, "t", "protocol.t", c.protocol.t);
        read(p, "mu", "protocol.mu", c.protocol.source.mean_photons);
        read(p, "loss", "protocol.loss", c.protocol.loss);
        std::string s;
        if (p.contains("mode") && !p["mode"].is_null())
        {
            read(p, "mode", "protocol.mode", s);
            try
            {
                c.protocol.source.mode = parse_photon_mode(s);
            }
            catch (ParameterError const& e)
            {
                throw ConfigError("protocol.mode", e.what());
            }
            mode_given = true;
        }
        if (p.contains("digest") && !p["digest"].is_null())
        {
            read(p, "digest", "protocol.digest", s);
            try
            {
                c.protocol.digest = parse_digest_algorithm(s);
            }
            catch (ParameterError const& e)
            {
                throw ConfigError("protocol.digest", e.what());
            }
        }
    }

    if (auto it = j.find("attack"); it != j.end())
    {
        auto const& a = *it;
        check_keys(a, "attack", {"name", "tap_fraction", "eta",
                                 "attack_probability", "guess_index"});
        std::string name;
        read(a, "name", "attack.name", name);
        if (!name.empty())
        {
            try
            {
                c.attack.kind = parse_attack_kind(name);
            }
            catch (ParameterError const& e)
            {
                throw ConfigError("attack.name", e.what());
            }
        }
        read(a, "tap_fraction", "attack.tap_fraction", c.attack.tap_fraction);
        read(a, "eta", "attack.eta", c.attack.eta);
        read(a, "attack_probability", "attack.attack_probability",
             c.attack.attack_probability);
        if (a.contains("guess_index") && !a["guess_index"].is_null())
        {
            int g = 0;
            read(a, "guess_index", "attack.guess_index", g);
            c.attack.fixed_guess_index = g;
        }
    }

    if (!mode_given)
        c.protocol.source.mode = default_mode_for(c.attack.kind);

    read(j, "trials", "trials", c.trials);
    read(j, "seed", "seed", c.seed);
    read(j, "threads", "threads", c.threads);
    read(j, "assertions", "assertions", c.assertions);

    if (auto it = j.find("output"); it != j.end())
    {
        check_keys(*it, "output", {"dir", "report", "transcript"});
        read(*it, "dir", "output.dir", c.output_dir);
        read(*it, "report", "output.report", c.report_name);
        if (it->contains("transcript") && !(*it)["transcript"].is_null())
        {
            std::string path;
            read(*it, "transcript", "output.transcript", path);
            c.transcript_path = path;
        }
    }
    if (auto it = j.find("tolerance"); it != j.end())
    {
        check_keys(*it, "tolerance", {"sigma"});
        read(*it, "sigma", "tolerance.sigma", c.sigma);
    }
    return c;
}

PhotonMode default_mode_for(AttackKind kind) noexcept
{
    switch (kind)
    {
    case AttackKind::PulseBeamSplit:
    case AttackKind::PassivePNS:
    case AttackKind::PnsTrojanComposite:
        return PhotonMode::Pulse;
    default:
        return PhotonMode::SinglePhoton;
    }
}

std::uint64_t session_seed(std::uint64_t root, int N, std::size_t trial)
{
    return RandomSource::derive_seed(
        RandomSource::derive_seed(root, static_cast<std::uint64_t>(N)), trial);
}

TrialResult run_trial(ExperimentConfig const& config, int N, std::size_t trial)
{
    ProtocolParams params = config.protocol;
    params.N = N;
    params.seed = session_seed(config.seed, N, trial);
    auto eve = make_interceptor(
        config.attack, params,
        RandomSource::derive_seed(params.seed,
                                  static_cast<std::uint64_t>(Stream::Eve)));

    TrialResult result;
    result.transcript = run_session(params, eve.get());
    if (eve)
        result.eve = eve->report();
    result.metrics = measure_trial(result.transcript, result.eve, trial);
    return result;
}

std::vector<int> ExperimentReport::n_values() const
{
    std::vector<int> ns;
    for (auto const& r : rows)
    {
        if (std::find(ns.begin(), ns.end(), r.N) == ns.end())
            ns.push_back(r.N);
    }
    return ns;
}

MetricTotals ExperimentReport::totals_for(int N) const
{
    MetricTotals t;
    for (auto const& r : rows)
    {
        if (r.N == N)
            t.add(r);
    }
    return t;
}

ExperimentReport run_experiment(ExperimentConfig const& config,
                                std::string* transcripts)
{
    config.validate();
    auto ns = config.n_values();

    struct Job
    {
        int N;
        std::size_t trial;
    };
    std::vector<Job> jobs;
    for (int n : ns)
        for (std::size_t t = 0; t < config.trials; ++t)
            jobs.push_back({n, t});

    std::vector<TrialMetrics> rows(jobs.size());
    std::vector<std::string> records(transcripts ? jobs.size() : 0);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
        {
            try
            {
                auto result = run_trial(config, jobs[i].N, jobs[i].trial);
                rows[i] = result.metrics;
                if (transcripts)
                {
                    std::ostringstream os;
                    write_transcript(result.transcript, os);
                    records[i] = os.str();
                }
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };

    unsigned workers = std::min<unsigned>(
        config.threads, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
    if (workers <= 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    ExperimentReport report;
    report.config = config_to_json(config);
    report.seed = config.seed;
    report.trials = config.trials;
    report.rounds_per_trial = config.protocol.rounds;
    report.mode = std::string(to_string(config.protocol.source.mode));
    report.attack = std::string(to_string(config.attack.kind));
    report.rows = std::move(rows);
    if (transcripts)
    {
        transcripts->clear();
        for (auto const& r : records)
            *transcripts += r;
    }
    return report;
}

std::vector<std::string> failed_assertions(ExperimentConfig const& config,
                                           ExperimentReport const& report)
{
    std::vector<std::string> failures;
    auto fmt = [](std::optional<double> v) {
        return v ? format_double(*v) : std::string("n/a");
    };
    for (int n : report.n_values())
    {
        auto t = report.totals_for(n);
        std::string at = "N=" + std::to_string(n) + ": ";

        double expected = matching_probability(n);
        double s = sift_rate(t).value_or(0.0);
        if (std::abs(s - expected) > config.sigma * binomial_sigma(expected, t.rounds))
            failures.push_back(at + "sift_rate " + format_double(s)
                               + " deviates from 1/N beyond tolerance");

        if (config.attack.kind == AttackKind::None)
        {
            if (t.bit_errors != 0)
                failures.push_back(at + "honest run has nonzero QBER "
                                   + fmt(qber(t)));
            if (t.ad_violations != 0)
                failures.push_back(at + "honest run has integrity violations");
            if (t.accepted != t.trials)
                failures.push_back(at + "honest run has non-Accepted verdicts");
            continue;
        }

        bool visible = t.bit_errors > 0 || t.ad_violations > 0;
        auto acc = eve_accuracy(t);
        bool at_chance = !acc
                         || *acc <= 0.5 + config.sigma * binomial_sigma(0.5, t.eve_guesses);
        if (!visible && !at_chance)
            failures.push_back(at + "attack gains information (accuracy "
                               + fmt(acc) + ") with zero QBER and zero AD violations");
    }
    return failures;
}

json report_to_json(ExperimentReport const& report)
{
    json results = json::array();
    for (int n : report.n_values())
    {
        auto t = report.totals_for(n);
        results.push_back({
            {"N", n},
            {"sift_rate", optional_json(sift_rate(t))},
            {"qber", optional_json(qber(t))},
            {"ad_violation_rate", optional_json(ad_violation_rate(t))},
            {"injected_ad_violation_rate",
             optional_json(injected_ad_violation_rate(t))},
            {"eve_accuracy", optional_json(eve_accuracy(t))},
            {"eve_probe_accuracy", optional_json(eve_probe_accuracy(t))},
            {"eve_analyzing_accuracy", optional_json(eve_analyzing_accuracy(t))},
            {"conclusive_rate", optional_json(conclusive_rate(t))},
            {"sifted_bits", t.sifted_bits},
            {"ad_clicks", t.ad_clicks},
            {"verdicts", {{"Accepted", t.accepted},
                          {"HashMismatch", t.hash_mismatch},
                          {"IntegrityViolation", t.integrity_violation}}},
            {"theory", {{"matching_prob", matching_probability(n)},
                        {"ie_sum", ie_sum(n)},
                        {"ie_mean", ie_mean(n)}}},
        });
    }
    json rows = json::array();
    for (auto const& r : report.rows)
        rows.push_back(metrics_to_json(r));
    return {
        {"schema_version", kReportSchemaVersion},
        {"seed", report.seed},
        {"trials", report.trials},
        {"rounds_per_trial", report.rounds_per_trial},
        {"mode", report.mode},
        {"attack", report.attack},
        {"config", report.config},
        {"results", std::move(results)},
        {"rows", std::move(rows)},
    };
}

ExperimentReport report_from_json(json const& j)
{
    auto version = j.at("schema_version").get<int>();
    if (version != kReportSchemaVersion)
        throw ProtocolError("unsupported report schema version "
                            + std::to_string(version));
    ExperimentReport r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.trials = j.at("trials").get<std::size_t>();
    r.rounds_per_trial = j.at("rounds_per_trial").get<std::size_t>();
    r.mode = j.at("mode").get<std::string>();
    r.attack = j.at("attack").get<std::string>();
    r.config = j.at("config");
    for (auto const& row : j.at("rows"))
        r.rows.push_back(metrics_from_json(row));
    return r;
}

std::string report_to_csv(ExperimentReport const& report)
{
    std::ostringstream os;
    os << "trial,N,mode,attack,rounds,sifted_bits,matched_rate,qber,ad_clicks,"
          "ad_violations,ad_violation_rate,eve_guesses,eve_correct,eve_accuracy,"
          "verdict\n";
    for (auto const& m : report.rows)
    {
        os << m.trial << ',' << m.N << ',' << report.mode << ',' << report.attack
           << ',' << m.rounds << ',' << m.sifted_bits << ','
           << format_optional(ratio(m.matched, m.rounds)) << ','
           << format_optional(ratio(m.bit_errors, m.sifted_bits)) << ','
           << m.ad_clicks << ',' << m.ad_violations << ','
           << format_optional(ratio(m.ad_violations, m.ad_clicks)) << ','
           << m.eve_guesses << ',' << m.eve_correct << ','
           << format_optional(ratio(m.eve_correct, m.eve_guesses)) << ','
           << to_string(m.verdict) << '\n';
    }
    return os.str();
}

void emit_report(ExperimentReport const& report, std::string const& base_path)
{
    write_file(base_path + ".json", report_to_json(report).dump(2) + "\n");
    write_file(base_path + ".csv", report_to_csv(report));
}

SecurityCurve curve_from_report(ExperimentReport const& report, double sigma)
{
    SecurityCurve curve;
    curve.attack = report.attack;
    for (int n : report.n_values())
    {
        auto t = report.totals_for(n);
        SecurityPoint p;
        p.N = n;
        p.sift_rate = sift_rate(t).value_or(0.0);
        p.qber_under_attack = qber(t);
        p.conclusive_rate = conclusive_rate(t);
        p.ad_violation_rate = ad_violation_rate(t);
        double expected = matching_probability(n);
        p.sift_law_ok = std::abs(p.sift_rate - expected)
                        <= sigma * binomial_sigma(expected, t.rounds);
        curve.points.push_back(p);
    }
    return curve;
}

SecurityCurve security_curve(ExperimentConfig base, std::span<int const> N_values)
{
    if (N_values.empty())
        throw ParameterError("security_curve: no N values");
    for (std::size_t i = 0; i < N_values.size(); ++i)
    {
        if (N_values[i] < 1)
            throw ParameterError("security_curve: N must be >= 1");
        if (i > 0 && N_values[i] <= N_values[i - 1])
            throw ParameterError("security_curve: N values must be strictly increasing");
    }
    base.N_values.assign(N_values.begin(), N_values.end());
    return curve_from_report(run_experiment(base), base.sigma);
}

void emit_curve(SecurityCurve const& curve, std::string const& base_path)
{
    json points = json::array();
    std::ostringstream csv;
    csv << "N,sift_rate,qber_under_attack,conclusive_rate,ad_violation_rate,"
           "sift_law_ok\n";
    for (auto const& p : curve.points)
    {
        points.push_back({{"N", p.N},
                          {"sift_rate", p.sift_rate},
                          {"qber_under_attack", optional_json(p.qber_under_attack)},
                          {"conclusive_rate", optional_json(p.conclusive_rate)},
                          {"ad_violation_rate", optional_json(p.ad_violation_rate)},
                          {"sift_law_ok", p.sift_law_ok}});
        csv << p.N << ',' << format_double(p.sift_rate) << ','
            << format_optional(p.qber_under_attack) << ','
            << format_optional(p.conclusive_rate) << ','
            << format_optional(p.ad_violation_rate) << ','
            << (p.sift_law_ok ? "true" : "false") << '\n';
    }
    json doc = {{"schema_version", kReportSchemaVersion},
                {"attack", curve.attack},
                {"points", std::move(points)}};
    write_file(base_path + "_curve.json", doc.dump(2) + "\n");
    write_file(base_path + "_curve.csv", csv.str());
}

}  // namespace sqkd

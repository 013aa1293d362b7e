#include "sqkd/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqkd/errors.hpp"
#include "sqkd/experiment.hpp"

namespace sqkd {

namespace {

using nlohmann::json;

struct Flags
{
    std::string config_path;
    int N = 0;
    std::vector<int> sweep;
    std::size_t rounds = 0;
    std::size_t trials = 0;
    double p_a = 0, t = 0, mu = 0, loss = 0;
    std::string mode, attack, digest;
    double eve_tap = 0, eta = 0, attack_prob = 0;
    int guess_index = 0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out_dir, report_name, transcript;
    double sigma = 0;
    bool no_assert = false;
};

std::string show(std::optional<double> v)
{
    if (!v)
        return "n/a";
    std::ostringstream os;
    os << std::setprecision(6) << *v;
    return os.str();
}

void print_summary(ExperimentReport const& report, std::ostream& out)
{
    out << "attack=" << report.attack << " mode=" << report.mode
        << " trials=" << report.trials
        << " rounds=" << report.rounds_per_trial << " seed=" << report.seed
        << '\n';
    for (int n : report.n_values())
    {
        auto t = report.totals_for(n);
        out << "N=" << n << " sift_rate=" << show(sift_rate(t))
            << " (1/N=" << show(matching_probability(n)) << ")"
            << " sifted_bits=" << t.sifted_bits << " qber=" << show(qber(t))
            << " ad_violation_rate=" << show(ad_violation_rate(t))
            << " injected_ad_violation_rate="
            << show(injected_ad_violation_rate(t))
            << " eve_accuracy=" << show(eve_accuracy(t))
            << " conclusive_rate=" << show(conclusive_rate(t))
            << " verdicts: Accepted=" << t.accepted
            << " HashMismatch=" << t.hash_mismatch
            << " IntegrityViolation=" << t.integrity_violation << '\n';
    }
}

}  // namespace

int run_cli(std::vector<std::string> const& args, std::ostream& out,
            std::ostream& err)
{
    CLI::App app{"Screening-angle QKD simulator and attack harness", "sqkd"};
    app.require_subcommand(1);
    Flags f;
    auto* run = app.add_subcommand("run", "Run sessions or an N sweep and write reports");

    auto* o_config = run->add_option("--config", f.config_path, "JSON config file")
                         ->check(CLI::ExistingFile);
    auto* o_N = run->add_option("--N", f.N, "Number of screening angles");
    auto* o_sweep = run->add_option("--sweep-N", f.sweep, "Comma-separated N values")
                        ->delimiter(',');
    auto* o_rounds = run->add_option("--rounds", f.rounds, "Rounds per session (M)");
    auto* o_trials = run->add_option("--trials", f.trials, "Independent sessions per N");
    auto* o_pa = run->add_option("--p-a", f.p_a, "Analyzing-angle probability");
    auto* o_t = run->add_option("--t", f.t, "AD transmission coefficient");
    auto* o_mode = run->add_option("--mode", f.mode, "single | pulse");
    auto* o_mu = run->add_option("--mu", f.mu, "Mean photon number in pulse mode");
    auto* o_loss = run->add_option("--loss", f.loss, "Per-leg photon loss");
    auto* o_digest = run->add_option("--digest", f.digest, "sha256 | sha3-256");
    auto* o_attack = run->add_option("--attack", f.attack,
                                     "none | impersonation | pulse_beamsplit | "
                                     "passive_pns | pns_trojan | cai | simple_trojan");
    auto* o_tap = run->add_option("--eve-tap", f.eve_tap, "Eve's probe recovery fraction r");
    auto* o_eta = run->add_option("--eta", f.eta, "Simple Trojan probe angle (radians)");
    auto* o_prob = run->add_option("--attack-prob", f.attack_prob,
                                   "Per-round probability that Eve acts");
    auto* o_guess = run->add_option("--guess-index", f.guess_index,
                                    "Impersonation: fixed screening-index guess");
    auto* o_seed = run->add_option("--seed", f.seed, "Root seed");
    auto* o_threads = run->add_option("--threads", f.threads, "Worker threads");
    auto* o_out = run->add_option("--out-dir", f.out_dir, "Output directory");
    auto* o_name = run->add_option("--report-name", f.report_name, "Report file stem");
    auto* o_tr = run->add_option("--transcript", f.transcript,
                                 "Write line-delimited session transcripts here");
    auto* o_sigma = run->add_option("--sigma", f.sigma, "Tolerance in binomial sigmas");
    run->add_flag("--no-assert", f.no_assert, "Skip run assertions");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try
    {
        app.parse(argv);
    }
    catch (CLI::CallForHelp const&)
    {
        out << app.help();
        return kExitOk;
    }
    catch (CLI::CallForAllHelp const&)
    {
        out << app.help();
        return kExitOk;
    }
    catch (CLI::ParseError const& e)
    {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    ExperimentConfig config;
    try
    {
        json j = json::object();
        if (*o_config)
        {
            std::ifstream is(f.config_path);
            try
            {
                j = json::parse(is);
            }
            catch (json::parse_error const& e)
            {
                throw ConfigError("config", std::string("parse error: ") + e.what());
            }
            if (!j.is_object())
                throw ConfigError("config", "top level must be an object");
        }

        auto& p = j["protocol"];
        if (p.is_null())
            p = json::object();
        auto& a = j["attack"];
        if (a.is_null())
            a = json::object();
        auto& o = j["output"];
        if (o.is_null())
            o = json::object();

        if (*o_N)
            p["N"] = f.N;
        if (*o_sweep)
            p["N_values"] = f.sweep;
        if (*o_rounds)
            p["rounds"] = f.rounds;
        if (*o_pa)
            p["p_a"] = f.p_a;
        if (*o_t)
            p["t"] = f.t;
        if (*o_mode)
            p["mode"] = f.mode;
        if (*o_mu)
            p["mu"] = f.mu;
        if (*o_loss)
            p["loss"] = f.loss;
        if (*o_digest)
            p["digest"] = f.digest;
        if (*o_attack)
            a["name"] = f.attack;
        if (*o_tap)
            a["tap_fraction"] = f.eve_tap;
        if (*o_eta)
            a["eta"] = f.eta;
        if (*o_prob)
            a["attack_probability"] = f.attack_prob;
        if (*o_guess)
            a["guess_index"] = f.guess_index;
        if (*o_trials)
            j["trials"] = f.trials;
        if (*o_seed)
            j["seed"] = f.seed;
        if (*o_threads)
            j["threads"] = f.threads;
        if (*o_sigma)
            j["tolerance"]["sigma"] = f.sigma;
        if (f.no_assert)
            j["assertions"] = false;
        if (*o_name)
            o["report"] = f.report_name;
        if (*o_tr)
            o["transcript"] = f.transcript;

        if (*o_out)
            o["dir"] = f.out_dir;
        else if (!o.contains("dir"))
        {
            if (char const* env = std::getenv(kOutDirEnv); env && *env)
                o["dir"] = env;
        }

        config = config_from_json(j);
        config.validate();

        std::error_code ec;
        std::filesystem::create_directories(config.output_dir, ec);
        if (ec || !std::filesystem::is_directory(config.output_dir))
            throw ConfigError("output.dir", "cannot create '" + config.output_dir
                                                + "': " + ec.message());
    }
    catch (ConfigError const& e)
    {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    }

    std::string transcripts;
    ExperimentReport report;
    try
    {
        report = run_experiment(config, config.transcript_path ? &transcripts : nullptr);

        print_summary(report, out);

        auto base = (std::filesystem::path(config.output_dir) / config.report_name).string();
        emit_report(report, base);
        out << "report: " << base << ".json, " << base << ".csv\n";
        if (report.n_values().size() > 1)
        {
            emit_curve(curve_from_report(report, config.sigma), base);
            out << "security curve: " << base << "_curve.json, " << base
                << "_curve.csv\n";
        }
        if (config.transcript_path)
        {
            std::ofstream os(*config.transcript_path, std::ios::binary | std::ios::trunc);
            os << transcripts;
            if (!os)
                throw std::runtime_error("cannot write transcript '"
                                         + *config.transcript_path + "'");
            out << "transcript: " << *config.transcript_path << '\n';
        }
    }
    catch (std::exception const& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitAssertionFailed;
    }

    if (!config.assertions)
        return kExitOk;
    auto failures = failed_assertions(config, report);
    for (auto const& msg : failures)
        err << "assertion failed: " << msg << '\n';
    return failures.empty() ? kExitOk : kExitAssertionFailed;
}

}  // namespace sqkd

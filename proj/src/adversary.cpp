#include "sqkd/adversary.hpp"

#include <algorithm>
#include <string>

#include "sqkd/errors.hpp"

namespace sqkd {

std::string_view to_string(AttackKind kind) noexcept
{
    switch (kind)
    {
    case AttackKind::None: return "none";
    case AttackKind::ImpersonationSinglePhoton: return "impersonation";
    case AttackKind::PulseBeamSplit: return "pulse_beamsplit";
    case AttackKind::PassivePNS: return "passive_pns";
    case AttackKind::PnsTrojanComposite: return "pns_trojan";
    case AttackKind::CaiStandardState: return "cai";
    case AttackKind::SimpleTrojan: return "simple_trojan";
    }
    return "unknown";
}

AttackKind parse_attack_kind(std::string_view name)
{
    for (auto kind : {AttackKind::None, AttackKind::ImpersonationSinglePhoton,
                      AttackKind::PulseBeamSplit, AttackKind::PassivePNS,
                      AttackKind::PnsTrojanComposite,
                      AttackKind::CaiStandardState, AttackKind::SimpleTrojan})
    {
        if (name == to_string(kind))
            return kind;
    }
    throw ParameterError("unknown attack '" + std::string(name) + "'");
}

void AttackConfig::validate(ProtocolParams const& params) const
{
    if (!(tap_fraction >= 0.0 && tap_fraction <= 1.0))
        throw ConfigError("attack.tap_fraction", "must be in [0, 1]");
    if (!(attack_probability >= 0.0 && attack_probability <= 1.0))
        throw ConfigError("attack.attack_probability", "must be in [0, 1]");
    if (fixed_guess_index && (*fixed_guess_index < 1 || *fixed_guess_index > params.N))
        throw ConfigError("attack.guess_index", "must be in [1, N]");

    bool pulse = params.source.mode == PhotonMode::Pulse;
    switch (kind)
    {
    case AttackKind::ImpersonationSinglePhoton:
        if (pulse)
            throw ConfigError("attack", "impersonation requires single-photon mode");
        break;
    case AttackKind::PulseBeamSplit:
    case AttackKind::PnsTrojanComposite:
        if (!pulse)
            throw ConfigError("attack", std::string(to_string(kind))
                                            + " requires pulse mode");
        break;
    default: break;
    }
}

std::vector<EncodingHypothesis>
consistent_hypotheses(std::vector<ProbeOutcome> const& outcomes, int N)
{
    std::vector<EncodingHypothesis> out;
    for (int j = 1; j <= N; ++j)
    {
        for (Bit k : {Bit{0}, Bit{1}})
        {
            PolarizationAngle state(screening_radians(j, N)
                                    + (k == 0 ? kQuarterPi : -kQuarterPi));
            bool ok = std::all_of(
                outcomes.begin(), outcomes.end(), [&](ProbeOutcome const& o) {
                    PolarizationAngle axis(screening_radians(o.basis_index, N)
                                           + kQuarterPi);
                    double p0 = aligned_probability(state, axis);
                    double p = o.outcome == 0 ? p0 : 1.0 - p0;
                    return p > 0.0;
                });
            if (ok)
                out.push_back({j, k});
        }
    }
    return out;
}

namespace {

enum Purpose : std::uint64_t
{
    kDecide = 1,
    kLeg1 = 2,
    kLeg2 = 3,
    kLeg3 = 4,
    kReadout = 5,
};

/// Per-round material Eve holds between legs.
struct EveStorage
{
    bool acting = false;
    double theta_prime = 0.0;
    Pulse e1;    // leg 1 capture
    Pulse leg2;  // leg 2 capture (passive PNS)
    Pulse e2;    // leg 2 compensated pulse or leg 3 capture
};

/// Shared bookkeeping: per-round storage, reports, Eve's own random
/// streams, and the published announcement.
class Adversary : public Interceptor
{
  public:
    Adversary(AttackConfig config, ProtocolParams const& params,
              std::uint64_t seed)
        : config_(std::move(config)), N_(params.N), seed_(seed)
    {
    }

    Pulse intercept(Leg leg, Pulse pulse, RoundId round) final
    {
        ensure(round);
        if (leg == Leg::Leg1_AliceToBob)
            storage_[round].acting = decide(round);
        if (!storage_[round].acting)
            return pulse;
        switch (leg)
        {
        case Leg::Leg1_AliceToBob: return on_leg1(std::move(pulse), round);
        case Leg::Leg2_BobToAlice: return on_leg2(std::move(pulse), round);
        case Leg::Leg3_AliceToBob: return on_leg3(std::move(pulse), round);
        }
        return pulse;
    }

    void observe(Announcement const& announcement) final
    {
        ensure(announcement.rounds() == 0 ? 0 : announcement.rounds() - 1);
        for (RoundId r = 0; r < announcement.rounds(); ++r)
        {
            if (storage_[r].acting)
                after_announcement(r, announcement);
        }
    }

    std::vector<EveRoundReport> report() const final { return reports_; }

  protected:
    virtual Pulse on_leg1(Pulse pulse, RoundId) { return pulse; }
    virtual Pulse on_leg2(Pulse pulse, RoundId) { return pulse; }
    virtual Pulse on_leg3(Pulse pulse, RoundId) { return pulse; }
    virtual void after_announcement(RoundId, Announcement const&) {}

    RandomSource rng(RoundId round, Purpose purpose) const
    {
        return RandomSource(RandomSource::derive_seed(
            RandomSource::derive_seed(seed_, round), purpose));
    }

    double alpha(int index) const { return screening_radians(index, N_); }

    EveStorage& store(RoundId r) { return storage_[r]; }
    EveRoundReport& out(RoundId r) { return reports_[r]; }

    AttackConfig const& config() const noexcept { return config_; }
    int N() const noexcept { return N_; }

    /// Pull Eve's own marked photons out of a leg-3 pulse, each with
    /// probability r. Returns the captured ones.
    Pulse recover_probes(Pulse& pulse, RoundId round)
    {
        auto r = rng(round, kLeg3);
        Pulse captured;
        std::vector<Photon> kept;
        for (auto& photon : pulse.photons)
        {
            if (photon.origin == Origin::TrojanInjected
                && r.bernoulli(config_.tap_fraction))
                captured.photons.push_back(photon);
            else
                kept.push_back(photon);
        }
        pulse.photons = std::move(kept);
        return captured;
    }

    /// Measure a captured probe in the post-announcement readout basis and
    /// record the key guess.
    void read_probe(RoundId round, Announcement const& ann, double known_offset)
    {
        auto& s = storage_[round];
        if (s.e2.empty())
            return;
        auto r = rng(round, kReadout);
        double alpha_a = alpha(ann.a_indices[round]);
        Bit outcome = measure(std::move(s.e2.photons.front()),
                              probe_readout_basis(alpha_a, known_offset), r);
        s.e2.photons.clear();
        reports_[round].captured_injected = true;
        reports_[round].guess = key_bit_from_outcome(outcome);
    }

  private:
    bool decide(RoundId round) const
    {
        if (config_.attack_probability >= 1.0)
            return true;
        if (config_.attack_probability <= 0.0)
            return false;
        return rng(round, kDecide).bernoulli(config_.attack_probability);
    }

    void ensure(RoundId round)
    {
        if (round >= storage_.size())
        {
            storage_.resize(round + 1);
            reports_.resize(round + 1);
        }
    }

    AttackConfig config_;
    int N_;
    std::uint64_t seed_;
    std::vector<EveStorage> storage_;
    std::vector<EveRoundReport> reports_;
};

/// Eve stands in for Bob towards Alice and for Alice towards Bob.
/// Leg 1 keeps Alice's pulse and sends Eve's own at theta'; leg 2 removes
/// theta' from Bob's pulse and returns Alice's own pulse to her; leg 3
/// reads Alice's encoding and re-encodes it onto Bob's returned pulse.
class ImpersonationBase : public Adversary
{
  public:
    using Adversary::Adversary;

  protected:
    Pulse on_leg1(Pulse pulse, RoundId round) override
    {
        auto& s = store(round);
        auto r = rng(round, kLeg1);
        s.theta_prime = r.uniform(0.0, kPi);
        Pulse fake;
        fake.round_id = round;
        fake.photons.assign(pulse.size(), Photon{PolarizationAngle(s.theta_prime),
                                                 Origin::EveReplayed});
        s.e1 = std::move(pulse);
        return fake;
    }

    Pulse on_leg2(Pulse pulse, RoundId round) override
    {
        auto& s = store(round);
        pulse.rotate_all(-s.theta_prime);
        s.e2 = std::move(pulse);
        Pulse back = std::move(s.e1);
        s.e1 = Pulse{};
        back.round_id = round;
        return back;
    }

    /// One photon of the compensated Bob pulse, rotated by `delta`; vacuum
    /// if Eve holds nothing.
    Pulse relay(RoundId round, double delta)
    {
        auto& s = store(round);
        Pulse out;
        out.round_id = round;
        if (s.e2.empty())
            return out;
        Photon p = s.e2.photons.front();
        p.polarization = p.polarization.rotated(delta);
        p.origin = Origin::EveReplayed;
        out.photons.push_back(p);
        s.e2 = Pulse{};
        return out;
    }
};

class ImpersonationSinglePhoton final : public ImpersonationBase
{
  public:
    using ImpersonationBase::ImpersonationBase;

  protected:
    Pulse on_leg3(Pulse pulse, RoundId round) override
    {
        if (pulse.empty())
        {
            store(round).e2 = Pulse{};
            return pulse;
        }
        auto r = rng(round, kLeg3);
        int guess = config().fixed_guess_index
                        ? *config().fixed_guess_index
                        : r.uniform_int(1, N());
        Bit o_e = measure(std::move(pulse.photons.front()),
                          MeasurementBasis(alpha(guess) + kQuarterPi), r);
        auto& rep = out(round);
        rep.readout_attempted = true;
        rep.conclusive = true;
        rep.guess = key_bit_from_outcome(o_e);
        rep.relay_index = guess;
        rep.relay_bit = o_e;
        // Re-encode only the sign, mirroring Alice's (-1)^k convention.
        return relay(round, o_e == 0 ? kQuarterPi : -kQuarterPi);
    }
};

class PulseBeamSplit final : public ImpersonationBase
{
  public:
    using ImpersonationBase::ImpersonationBase;

  protected:
    Pulse on_leg3(Pulse pulse, RoundId round) override
    {
        if (pulse.empty())
        {
            store(round).e2 = Pulse{};
            return pulse;
        }
        auto r = rng(round, kLeg3);
        auto parts = split_evenly(std::move(pulse), static_cast<std::size_t>(N()), r);
        std::vector<ProbeOutcome> outcomes;
        for (int i = 1; i <= N(); ++i)
        {
            for (auto& photon : parts[static_cast<std::size_t>(i - 1)].photons)
            {
                Bit o = measure(std::move(photon),
                                MeasurementBasis(alpha(i) + kQuarterPi), r);
                outcomes.push_back({i, o});
            }
        }
        auto consistent = consistent_hypotheses(outcomes, N());

        auto& rep = out(round);
        rep.readout_attempted = true;
        rep.conclusive = consistent.size() == 1;

        EncodingHypothesis pick;
        if (consistent.empty())
        {
            pick.index = r.uniform_int(1, N());
            pick.k = r.bit();
        }
        else
        {
            pick = consistent[static_cast<std::size_t>(
                r.uniform_int(0, static_cast<int>(consistent.size()) - 1))];
        }
        rep.guess = pick.k;
        rep.relay_index = pick.index;
        rep.relay_bit = pick.k;
        return relay(round, (pick.k == 0 ? kQuarterPi : -kQuarterPi)
                                + alpha(pick.index));
    }
};

/// Peels one photon off every multi-photon pulse on each leg and leaves
/// the rest untouched.
class PassivePns final : public Adversary
{
  public:
    using Adversary::Adversary;

  protected:
    Pulse on_leg1(Pulse pulse, RoundId round) override
    {
        return peel(std::move(pulse), store(round).e1);
    }
    Pulse on_leg2(Pulse pulse, RoundId round) override
    {
        return peel(std::move(pulse), store(round).leg2);
    }
    Pulse on_leg3(Pulse pulse, RoundId round) override
    {
        return peel(std::move(pulse), store(round).e2);
    }

    /// The leg-3 photon sits at phi + (-1)^k pi/4 + alpha_a + alpha_b. Both
    /// screening angles are public; phi is public only on analyzing rounds,
    /// otherwise Eve assumes phi = 0.
    void after_announcement(RoundId round, Announcement const& ann) override
    {
        auto& s = store(round);
        if (s.e2.empty())
            return;
        double phi_est = ann.phi_star_values[round]
                             ? radians(*ann.phi_star_values[round])
                             : 0.0;
        double axis = phi_est + alpha(ann.a_indices[round])
                      + alpha(ann.b_indices[round]) + kQuarterPi;
        auto r = rng(round, kReadout);
        Bit o = measure(std::move(s.e2.photons.front()), MeasurementBasis(axis), r);
        s.e2 = Pulse{};
        out(round).guess = key_bit_from_outcome(o);
    }

  private:
    static Pulse peel(Pulse pulse, Pulse& stash)
    {
        if (pulse.size() >= 2)
        {
            stash.photons.push_back(pulse.photons.back());
            pulse.photons.pop_back();
        }
        return pulse;
    }
};

/// Leg 1: split off one photon |theta> from a multi-photon pulse. Leg 2:
/// inject it into Bob's returning pulse so Alice's unitary cancels theta.
/// Leg 3: recover it; it now carries (-1)^k pi/4 + alpha_a.
class PnsTrojanComposite final : public Adversary
{
  public:
    using Adversary::Adversary;

  protected:
    Pulse on_leg1(Pulse pulse, RoundId round) override
    {
        if (pulse.size() >= 2)
        {
            store(round).e1.photons.push_back(pulse.photons.back());
            pulse.photons.pop_back();
        }
        return pulse;
    }

    Pulse on_leg2(Pulse pulse, RoundId round) override
    {
        auto& s = store(round);
        for (auto photon : s.e1.photons)
        {
            photon.origin = Origin::TrojanInjected;
            pulse.photons.push_back(photon);
        }
        s.e1 = Pulse{};
        return pulse;
    }

    Pulse on_leg3(Pulse pulse, RoundId round) override
    {
        store(round).e2 = recover_probes(pulse, round);
        return pulse;
    }

    void after_announcement(RoundId round, Announcement const& ann) override
    {
        read_probe(round, ann, 0.0);
    }
};

/// Fixed-angle probe injected on leg 2 and recovered on leg 3. With
/// probe angle 0 this is the standard-state variant, whose recovered probe
/// carries an uncompensated -theta.
class FixedProbeTrojan final : public Adversary
{
  public:
    FixedProbeTrojan(AttackConfig config, ProtocolParams const& params,
                     std::uint64_t seed, double probe_angle)
        : Adversary(std::move(config), params, seed), probe_angle_(probe_angle)
    {
    }

  protected:
    Pulse on_leg2(Pulse pulse, RoundId) override
    {
        pulse.photons.push_back(
            Photon{PolarizationAngle(probe_angle_), Origin::TrojanInjected});
        return pulse;
    }

    Pulse on_leg3(Pulse pulse, RoundId round) override
    {
        store(round).e2 = recover_probes(pulse, round);
        return pulse;
    }

    void after_announcement(RoundId round, Announcement const& ann) override
    {
        read_probe(round, ann, probe_angle_);
    }

  private:
    double probe_angle_;
};

}  // namespace

std::unique_ptr<Interceptor> make_interceptor(AttackConfig const& config,
                                              ProtocolParams const& params,
                                              std::uint64_t eve_seed)
{
    config.validate(params);
    switch (config.kind)
    {
    case AttackKind::None: return nullptr;
    case AttackKind::ImpersonationSinglePhoton:
        return std::make_unique<ImpersonationSinglePhoton>(config, params, eve_seed);
    case AttackKind::PulseBeamSplit:
        return std::make_unique<PulseBeamSplit>(config, params, eve_seed);
    case AttackKind::PassivePNS:
        return std::make_unique<PassivePns>(config, params, eve_seed);
    case AttackKind::PnsTrojanComposite:
        return std::make_unique<PnsTrojanComposite>(config, params, eve_seed);
    case AttackKind::CaiStandardState:
        return std::make_unique<FixedProbeTrojan>(config, params, eve_seed, 0.0);
    case AttackKind::SimpleTrojan:
        return std::make_unique<FixedProbeTrojan>(config, params, eve_seed,
                                                  config.eta);
    }
    return nullptr;
}

}  // namespace sqkd

#include "sqkd/json_io.hpp"

#include "sqkd/errors.hpp"

namespace sqkd {

std::string_view to_string(PhotonMode mode) noexcept
{
    return mode == PhotonMode::SinglePhoton ? "single" : "pulse";
}

PhotonMode parse_photon_mode(std::string_view name)
{
    if (name == "single")
        return PhotonMode::SinglePhoton;
    if (name == "pulse")
        return PhotonMode::Pulse;
    throw ParameterError("unknown mode '" + std::string(name)
                         + "' (expected single or pulse)");
}

nlohmann::json params_to_json(ProtocolParams const& p)
{
    return {
        {"N", p.N},
        {"rounds", p.rounds},
        {"p_a", p.p_a},
        {"t", p.t},
        {"mode", std::string(to_string(p.source.mode))},
        {"mu", p.source.mean_photons},
        {"loss", p.loss},
        {"seed", p.seed},
        {"digest", std::string(to_string(p.digest))},
    };
}

ProtocolParams params_from_json(nlohmann::json const& j)
{
    ProtocolParams p;
    p.N = j.at("N").get<int>();
    p.rounds = j.at("rounds").get<std::size_t>();
    p.p_a = j.at("p_a").get<double>();
    p.t = j.at("t").get<double>();
    p.source.mode = parse_photon_mode(j.at("mode").get<std::string>());
    p.source.mean_photons = j.at("mu").get<double>();
    p.loss = j.at("loss").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.digest = parse_digest_algorithm(j.at("digest").get<std::string>());
    return p;
}

}  // namespace sqkd

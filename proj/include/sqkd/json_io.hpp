#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "sqkd/photonics.hpp"
#include "sqkd/protocol.hpp"

namespace sqkd {

std::string_view to_string(PhotonMode mode) noexcept;
/// Accepts "single" or "pulse"; throws ParameterError otherwise.
PhotonMode parse_photon_mode(std::string_view name);

nlohmann::json params_to_json(ProtocolParams const& params);
ProtocolParams params_from_json(nlohmann::json const& j);

}  // namespace sqkd

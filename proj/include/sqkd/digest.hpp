#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqkd/photonics.hpp"

namespace sqkd {

using BitString = std::vector<Bit>;
using Digest = std::array<std::uint8_t, 32>;

enum class DigestAlgorithm : std::uint8_t
{
    Sha256,
    Sha3_256,
};

std::string_view to_string(DigestAlgorithm algorithm) noexcept;
/// Throws ParameterError for unknown names.
DigestAlgorithm parse_digest_algorithm(std::string_view name);

/// Big-endian bit packing: bit i lands in byte i/8 at position 7 - i%8.
/// The final byte is zero-padded.
std::vector<std::uint8_t> pack_bits(std::span<Bit const> bits);

/// 256-bit digest of the packed key.
Digest digest_key(std::span<Bit const> bits,
                  DigestAlgorithm algorithm = DigestAlgorithm::Sha256);

std::string to_hex(Digest const& digest);

}  // namespace sqkd

#include "sqkd/digest.hpp"

#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

#include "sqkd/errors.hpp"

namespace sqkd {

std::string_view to_string(DigestAlgorithm algorithm) noexcept
{
    switch (algorithm)
    {
    case DigestAlgorithm::Sha256: return "sha256";
    case DigestAlgorithm::Sha3_256: return "sha3-256";
    }
    return "unknown";
}

DigestAlgorithm parse_digest_algorithm(std::string_view name)
{
    if (name == "sha256")
        return DigestAlgorithm::Sha256;
    if (name == "sha3-256")
        return DigestAlgorithm::Sha3_256;
    throw ParameterError("unknown digest algorithm '" + std::string(name)
                         + "' (expected sha256 or sha3-256)");
}

std::vector<std::uint8_t> pack_bits(std::span<Bit const> bits)
{
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
    {
        if (bits[i] & 1u)
            bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
    return bytes;
}

Digest digest_key(std::span<Bit const> bits, DigestAlgorithm algorithm)
{
    auto bytes = pack_bits(bits);
    EVP_MD const* md = algorithm == DigestAlgorithm::Sha256 ? EVP_sha256()
                                                            : EVP_sha3_256();
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
        EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    Digest out{};
    unsigned len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1
        || EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1
        || EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1
        || len != out.size())
    {
        throw std::runtime_error("digest_key: OpenSSL digest failed");
    }
    return out;
}

std::string to_hex(Digest const& digest)
{
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(digest.size() * 2);
    for (auto b : digest)
    {
        s.push_back(kHex[b >> 4]);
        s.push_back(kHex[b & 0xF]);
    }
    return s;
}

}  // namespace sqkd

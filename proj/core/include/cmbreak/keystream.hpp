#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cmbreak/key.hpp"

namespace cmbreak {

struct KeystreamSet {
    std::vector<std::uint32_t> phi1;  // [0, M)
    std::vector<std::uint32_t> phi2;  // [0, N)
    std::vector<std::uint8_t> phi3;   // Confusion I mask, from g
    std::vector<std::uint8_t> phi4;   // Confusion II mask, from f

    friend bool operator==(const KeystreamSet&, const KeystreamSet&) = default;
};

/// Quantized orbit of length n: floor(psi(k) * 1e14) mod modulus.
std::vector<std::uint32_t> orbit_keystream(const MapSpec& map, double x0, std::size_t n,
                                           std::uint32_t modulus);

/// Throws KeyRejected (context: "orbit", "iteration") when any orbit escapes.
KeystreamSet generate_keystreams(const SecretKey& key, std::size_t rows, std::size_t cols);

}  // namespace cmbreak

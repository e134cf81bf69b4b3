#include "cmbreak/keystream.hpp"

#include <string>

#include "cmbreak/errors.hpp"

namespace cmbreak {

std::vector<std::uint32_t> orbit_keystream(const MapSpec& map, double x0, std::size_t n,
                                           std::uint32_t modulus) {
    const Orbit orbit = iterate_map(map, x0, n);
    std::vector<std::uint32_t> out;
    out.reserve(n);
    for (double psi : orbit.states()) out.push_back(quantize(psi, modulus));
    return out;
}

namespace {

template <typename Fn>
auto keyed(const char* which, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        Error::Context ctx = e.context();
        ctx["orbit"] = which;
        ctx["cause"] = std::string(to_string(e.code()));
        throw Error(ErrorCode::KeyRejected, std::string("key rejected, orbit ") + which + ": " + e.what(),
                    std::move(ctx));
    }
}

std::vector<std::uint8_t> narrow(const std::vector<std::uint32_t>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

KeystreamSet generate_keystreams(const SecretKey& key, std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw Error(ErrorCode::DimensionMismatch, "image dimensions must be positive");
    const std::size_t n = rows * cols;
    KeystreamSet ks;
    ks.phi1 = keyed("f1", [&] {
        return orbit_keystream(key.f1.params, key.f1.x0, n, static_cast<std::uint32_t>(rows));
    });
    ks.phi2 = keyed("f2", [&] {
        return orbit_keystream(key.f2.params, key.f2.x0, n, static_cast<std::uint32_t>(cols));
    });
    ks.phi3 = keyed("g", [&] { return narrow(orbit_keystream(key.g.params, key.g.y0, n, 256)); });
    ks.phi4 = keyed("f3", [&] { return narrow(orbit_keystream(key.f3.params, key.f3.x0, n, 256)); });
    return ks;
}

}  // namespace cmbreak

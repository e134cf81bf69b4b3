#pragma once

// Shared fixtures: seeded random images and keys, brute-force reference
// models of the cipher stages, and keystream test doubles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cmbreak/cipher.hpp"
#include "cmbreak/cryptanalysis.hpp"
#include "cmbreak/errors.hpp"
#include "cmbreak/key.hpp"
#include "cmbreak/keystream.hpp"

namespace cmtest {

using namespace cmbreak;

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
    Bytes out(n);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& b : out) b = static_cast<std::uint8_t>(byte(rng));
    return out;
}

inline Image random_image(std::mt19937_64& rng, Dims dims) {
    return Image(dims.rows, dims.cols, random_bytes(rng, dims.area()));
}

/// Draws keys from the declared sampler until one survives keystream
/// generation at the given size.
inline SecretKey usable_key(KeySampler& sampler, Dims dims) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        SecretKey key = sampler();
        try {
            (void)generate_keystreams(key, dims.rows, dims.cols);
            return key;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::KeyRejected) throw;
        }
    }
    throw std::runtime_error("no usable key in 1000 draws");
}

/// phi1/phi2 that make every swap a self-swap.
inline KeystreamSet identity_keystreams(Dims dims, std::uint8_t phi3 = 0, std::uint8_t phi4 = 0) {
    KeystreamSet ks;
    const std::size_t n = dims.area();
    ks.phi1.resize(n);
    ks.phi2.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        ks.phi1[k] = static_cast<std::uint32_t>(k / dims.cols);
        ks.phi2[k] = static_cast<std::uint32_t>(k % dims.cols);
    }
    ks.phi3.assign(n, phi3);
    ks.phi4.assign(n, phi4);
    return ks;
}

inline KeystreamSet random_keystreams(std::mt19937_64& rng, Dims dims) {
    KeystreamSet ks;
    const std::size_t n = dims.area();
    std::uniform_int_distribution<std::uint32_t> row(0, static_cast<std::uint32_t>(dims.rows - 1));
    std::uniform_int_distribution<std::uint32_t> col(0, static_cast<std::uint32_t>(dims.cols - 1));
    for (std::size_t k = 0; k < n; ++k) {
        ks.phi1.push_back(row(rng));
        ks.phi2.push_back(col(rng));
    }
    ks.phi3 = random_bytes(rng, n);
    ks.phi4 = random_bytes(rng, n);
    return ks;
}

/// Smooth photo-like test scene: lit background, a few soft-edged blobs and
/// low-frequency value-noise texture. Deterministic for a given rng state.
inline Image synthetic_scene(std::mt19937_64& rng, Dims dims) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double w = static_cast<double>(dims.cols), h = static_cast<double>(dims.rows);

    constexpr std::size_t grid = 17;
    std::vector<double> lattice(grid * grid);
    for (auto& v : lattice) v = u(rng);
    auto noise = [&](double x, double y) {
        const double gx = x / w * (grid - 1), gy = y / h * (grid - 1);
        const auto ix = std::min<std::size_t>(static_cast<std::size_t>(gx), grid - 2);
        const auto iy = std::min<std::size_t>(static_cast<std::size_t>(gy), grid - 2);
        const double fx = gx - ix, fy = gy - iy;
        const double sx = fx * fx * (3 - 2 * fx), sy = fy * fy * (3 - 2 * fy);
        const double a = lattice[iy * grid + ix], b = lattice[iy * grid + ix + 1];
        const double c = lattice[(iy + 1) * grid + ix], d = lattice[(iy + 1) * grid + ix + 1];
        return (a + (b - a) * sx) * (1 - sy) + (c + (d - c) * sx) * sy;
    };

    struct Blob {
        double cx, cy, rx, ry, level;
    };
    std::vector<Blob> blobs;
    for (int i = 0; i < 6; ++i) {
        blobs.push_back({u(rng) * w, u(rng) * h, (0.05 + 0.2 * u(rng)) * w, (0.05 + 0.2 * u(rng)) * h,
                         40.0 + 180.0 * u(rng)});
    }

    Bytes data(dims.area());
    for (std::size_t r = 0; r < dims.rows; ++r) {
        for (std::size_t c = 0; c < dims.cols; ++c) {
            const double x = static_cast<double>(c), y = static_cast<double>(r);
            double v = 60.0 + 90.0 * (x / w) * (1.0 - 0.5 * y / h);
            for (const auto& b : blobs) {
                const double dx = (x - b.cx) / b.rx, dy = (y - b.cy) / b.ry;
                const double t = std::clamp(1.5 - std::sqrt(dx * dx + dy * dy) * 1.5, 0.0, 1.0);
                v += (b.level - v) * t;
            }
            v += 40.0 * (noise(x, y) - 0.5) + 4.0 * (u(rng) - 0.5);
            data[r * dims.cols + c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return Image(dims.rows, dims.cols, std::move(data));
}

// --- reference models, written straight from the stage definitions ---------

inline std::uint8_t add256(int a, int b) { return static_cast<std::uint8_t>((a + b) & 0xFF); }

inline Bytes ref_confusion1(const Bytes& buf, const Bytes& phi3, std::uint8_t seed) {
    Bytes out(buf.size());
    int prev = seed;
    for (std::size_t k = 0; k < buf.size(); ++k) {
        prev = phi3[k] ^ add256(buf[k], phi3[k]) ^ prev;
        out[k] = static_cast<std::uint8_t>(prev);
    }
    return out;
}

/// Literal swap loop over a plain vector.
template <typename T>
std::vector<T> ref_permute(std::vector<T> v, const KeystreamSet& ks, std::size_t cols) {
    for (std::size_t k = 0; k < v.size(); ++k) {
        const std::size_t t = static_cast<std::size_t>(ks.phi1[k]) * cols + ks.phi2[k];
        std::swap(v[k], v[t]);
    }
    return v;
}

/// Source index -> destination, by pushing the identity-index image through
/// the swap loop.
inline std::vector<std::uint32_t> ref_net_permutation(const KeystreamSet& ks, Dims dims) {
    std::vector<std::uint32_t> idx(dims.area());
    std::iota(idx.begin(), idx.end(), 0u);
    const auto moved = ref_permute(idx, ks, dims.cols);  // moved[t] = source at t
    std::vector<std::uint32_t> dest(dims.area());
    for (std::size_t t = 0; t < moved.size(); ++t) dest[moved[t]] = static_cast<std::uint32_t>(t);
    return dest;
}

inline Image ref_encrypt(const Image& img, const KeystreamSet& ks, std::uint8_t seed) {
    const Bytes permuted = ref_permute(img.data(), ks, img.cols());
    Bytes c = ref_confusion1(permuted, ks.phi3, seed);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] ^= ks.phi4[k];
    return Image(img.rows(), img.cols(), std::move(c));
}

/// Test double for an oracle with explicit keystreams.
class KeystreamOracle final : public EncryptionOracle {
public:
    KeystreamOracle(Dims dims, KeystreamSet ks, std::uint8_t seed) : dims_(dims), ks_(std::move(ks)), seed_(seed) {}

    Dims dims() const override { return dims_; }
    Image query(const Image& plain) override {
        ++queries_;
        return encrypt_with(plain, ks_, seed_);
    }
    std::size_t queries() const { return queries_; }

private:
    Dims dims_;
    KeystreamSet ks_;
    std::uint8_t seed_;
    std::size_t queries_ = 0;
};

/// A scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("cmbreak-" + tag + "-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace cmtest

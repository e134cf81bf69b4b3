#pragma once

// The composition-map image cipher: swap permutation, Confusion I (chained
// masked addition) and Confusion II (keystream XOR). All indices are 0-based
// row-major linear indices.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cmbreak/errors.hpp"
#include "cmbreak/key.hpp"
#include "cmbreak/keystream.hpp"

namespace cmbreak {

using Bytes = std::vector<std::uint8_t>;

struct Dims {
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t area() const noexcept { return rows * cols; }
    friend bool operator==(const Dims&, const Dims&) = default;
};

/// M x N grayscale byte image, row-major. Also used for permuted and cipher
/// images. Arbitrary byte strings are carried as 1 x L images.
class Image {
public:
    Image(std::size_t rows, std::size_t cols, std::uint8_t fill = 0);
    Image(std::size_t rows, std::size_t cols, Bytes data);

    static Image from_bytes(std::span<const std::uint8_t> bytes);

    std::size_t rows() const noexcept { return dims_.rows; }
    std::size_t cols() const noexcept { return dims_.cols; }
    Dims dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const std::uint8_t> bytes() const noexcept { return data_; }
    std::span<std::uint8_t> bytes() noexcept { return data_; }
    const Bytes& data() const noexcept { return data_; }

    std::uint8_t operator[](std::size_t k) const { return data_[k]; }
    std::uint8_t& operator[](std::size_t k) { return data_[k]; }
    std::uint8_t at(std::size_t row, std::size_t col) const { return data_.at(row * dims_.cols + col); }
    std::uint8_t& at(std::size_t row, std::size_t col) { return data_.at(row * dims_.cols + col); }

    friend bool operator==(const Image&, const Image&) = default;

private:
    Dims dims_;
    Bytes data_;
};

/// Swap targets t(k) = phi1(k) * N + phi2(k).
std::vector<std::uint32_t> swap_targets(std::span<const std::uint32_t> phi1,
                                        std::span<const std::uint32_t> phi2, Dims dims);

/// Swaps buf[k] with buf[targets[k]] for k ascending (forward) or descending.
template <typename T>
void apply_swaps(std::span<T> buf, std::span<const std::uint32_t> targets, bool forward = true) {
    if (buf.size() != targets.size()) {
        throw Error(ErrorCode::LengthMismatch, "swap stream length differs from buffer length");
    }
    const std::size_t n = buf.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = forward ? i : n - 1 - i;
        const std::size_t t = targets[k];
        if (t >= n) throw Error(ErrorCode::LengthMismatch, "swap target outside buffer");
        std::swap(buf[k], buf[t]);
    }
}

Image permute(const Image& img, std::span<const std::uint32_t> phi1, std::span<const std::uint32_t> phi2);
Image inverse_permute(const Image& img, std::span<const std::uint32_t> phi1,
                      std::span<const std::uint32_t> phi2);

/// Net effect of the whole swap sequence as a map source -> destination:
/// permute(img)[P[s]] == img[s].
std::vector<std::uint32_t> net_permutation(std::span<const std::uint32_t> phi1,
                                           std::span<const std::uint32_t> phi2, Dims dims);

/// out(k) = phi3(k) ^ ((buf(k) + phi3(k)) mod 256) ^ out(k-1), out(-1) = seed.
Bytes confusion1(std::span<const std::uint8_t> buf, std::span<const std::uint8_t> phi3, std::uint8_t seed);

/// buf(k) = ((c(k) ^ c(k-1) ^ phi3(k)) - phi3(k)) mod 256, c(-1) = seed.
Bytes confusion1_inverse(std::span<const std::uint8_t> buf, std::span<const std::uint8_t> phi3,
                         std::uint8_t seed);

/// Elementwise XOR; its own inverse.
Bytes confusion2(std::span<const std::uint8_t> buf, std::span<const std::uint8_t> phi4);

Image encrypt(const Image& img, const SecretKey& key);
Image decrypt(const Image& cimg, const SecretKey& key);

/// Same pipelines with precomputed keystreams (must match the image area).
Image encrypt_with(const Image& img, const KeystreamSet& ks, std::uint8_t seed);
Image decrypt_with(const Image& cimg, const KeystreamSet& ks, std::uint8_t seed);

}  // namespace cmbreak

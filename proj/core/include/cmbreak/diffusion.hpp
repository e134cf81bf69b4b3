#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "cmbreak/cipher.hpp"

namespace cmbreak {

inline constexpr std::size_t kBitPlanes = 8;

/// Where two cipher images differ, split by bit plane (0 = least significant).
struct DiffReport {
    Dims dims;
    std::size_t row = 0;
    std::size_t col = 0;
    unsigned bit = 0;
    std::array<std::vector<std::uint8_t>, kBitPlanes> masks;  // 1 where the plane bit differs
    std::array<std::size_t, kBitPlanes> counts{};
    std::optional<std::size_t> first_changed;  // linear scan index

    std::size_t changed_bits() const noexcept;
    /// Changed bits over all planes divided by 8 * MN.
    double changed_fraction() const noexcept;
};

DiffReport diff_ciphers(const Image& a, const Image& b, std::size_t row, std::size_t col, unsigned bit);

/// Encrypts `img` and a copy with bit `bit` of pixel (row, col) flipped.
DiffReport bit_flip_diff(const SecretKey& key, const Image& img, std::size_t row, std::size_t col, unsigned bit);
DiffReport bit_flip_diff_with(const KeystreamSet& ks, std::uint8_t seed, const Image& img, std::size_t row,
                              std::size_t col, unsigned bit);

struct PlaneRow {
    unsigned plane;
    std::size_t count;
    double fraction;  // count / MN
};

struct PlaneSummary {
    std::vector<PlaneRow> rows;  // planes 0..7
    std::optional<unsigned> lowest_changed;
};

PlaneSummary plane_change_summary(const DiffReport& report);

/// White (255) where plane `plane` changed, black elsewhere.
Image plane_mask_image(const DiffReport& report, unsigned plane);

}  // namespace cmbreak

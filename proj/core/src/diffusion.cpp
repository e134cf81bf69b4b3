#include "cmbreak/diffusion.hpp"

#include <numeric>
#include <string>

namespace cmbreak {

namespace {

Image flipped(const Image& img, std::size_t row, std::size_t col, unsigned bit) {
    if (row >= img.rows() || col >= img.cols() || bit >= kBitPlanes) {
        throw Error(ErrorCode::DomainError, "flip position or bit level out of range",
                    {{"row", std::to_string(row)}, {"col", std::to_string(col)}, {"bit", std::to_string(bit)}});
    }
    Image out = img;
    out.at(row, col) ^= static_cast<std::uint8_t>(1u << bit);
    return out;
}

}  // namespace

std::size_t DiffReport::changed_bits() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

double DiffReport::changed_fraction() const noexcept {
    const std::size_t total = kBitPlanes * dims.area();
    return total == 0 ? 0.0 : static_cast<double>(changed_bits()) / static_cast<double>(total);
}

DiffReport diff_ciphers(const Image& a, const Image& b, std::size_t row, std::size_t col, unsigned bit) {
    if (a.dims() != b.dims()) throw Error(ErrorCode::DimensionMismatch, "cipher images differ in size");
    DiffReport r;
    r.dims = a.dims();
    r.row = row;
    r.col = col;
    r.bit = bit;
    for (auto& m : r.masks) m.assign(a.size(), 0);
    for (std::size_t k = 0; k < a.size(); ++k) {
        const auto x = static_cast<std::uint8_t>(a[k] ^ b[k]);
        if (x == 0) continue;
        if (!r.first_changed) r.first_changed = k;
        for (unsigned p = 0; p < kBitPlanes; ++p) {
            if ((x >> p) & 1u) {
                r.masks[p][k] = 1;
                ++r.counts[p];
            }
        }
    }
    return r;
}

DiffReport bit_flip_diff_with(const KeystreamSet& ks, std::uint8_t seed, const Image& img, std::size_t row,
                              std::size_t col, unsigned bit) {
    const Image other = flipped(img, row, col, bit);
    return diff_ciphers(encrypt_with(img, ks, seed), encrypt_with(other, ks, seed), row, col, bit);
}

DiffReport bit_flip_diff(const SecretKey& key, const Image& img, std::size_t row, std::size_t col, unsigned bit) {
    return bit_flip_diff_with(generate_keystreams(key, img.rows(), img.cols()), key.s, img, row, col, bit);
}

PlaneSummary plane_change_summary(const DiffReport& report) {
    PlaneSummary s;
    const auto area = static_cast<double>(report.dims.area());
    for (unsigned p = 0; p < kBitPlanes; ++p) {
        const std::size_t c = report.counts[p];
        s.rows.push_back({p, c, area == 0 ? 0.0 : static_cast<double>(c) / area});
        if (c > 0 && !s.lowest_changed) s.lowest_changed = p;
    }
    return s;
}

Image plane_mask_image(const DiffReport& report, unsigned plane) {
    if (plane >= kBitPlanes) throw Error(ErrorCode::DomainError, "bit plane out of range");
    Bytes data(report.masks[plane].size());
    for (std::size_t k = 0; k < data.size(); ++k) data[k] = report.masks[plane][k] ? 255 : 0;
    return Image(report.dims.rows, report.dims.cols, std::move(data));
}

}  // namespace cmbreak

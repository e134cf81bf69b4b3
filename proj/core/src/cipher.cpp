#include "cmbreak/cipher.hpp"

#include <numeric>
#include <string>

namespace cmbreak {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw Error(ErrorCode::LengthMismatch, std::string(what) + ": length mismatch",
                    {{"expected", std::to_string(a)}, {"actual", std::to_string(b)}});
    }
}

void require_keystreams(const KeystreamSet& ks, std::size_t n) {
    require_same_length(n, ks.phi1.size(), "phi1");
    require_same_length(n, ks.phi2.size(), "phi2");
    require_same_length(n, ks.phi3.size(), "phi3");
    require_same_length(n, ks.phi4.size(), "phi4");
}

}  // namespace

Image::Image(std::size_t rows, std::size_t cols, std::uint8_t fill)
    : dims_{rows, cols}, data_(rows * cols, fill) {}

Image::Image(std::size_t rows, std::size_t cols, Bytes data) : dims_{rows, cols}, data_(std::move(data)) {
    require_same_length(rows * cols, data_.size(), "image payload");
}

Image Image::from_bytes(std::span<const std::uint8_t> bytes) {
    return Image(1, bytes.size(), Bytes(bytes.begin(), bytes.end()));
}

std::vector<std::uint32_t> swap_targets(std::span<const std::uint32_t> phi1,
                                        std::span<const std::uint32_t> phi2, Dims dims) {
    const std::size_t n = dims.area();
    require_same_length(n, phi1.size(), "phi1");
    require_same_length(n, phi2.size(), "phi2");
    std::vector<std::uint32_t> t(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t target = std::size_t{phi1[k]} * dims.cols + phi2[k];
        if (target >= n) {
            throw Error(ErrorCode::LengthMismatch, "keystream value out of range for image dimensions",
                        {{"k", std::to_string(k)}});
        }
        t[k] = static_cast<std::uint32_t>(target);
    }
    return t;
}

Image permute(const Image& img, std::span<const std::uint32_t> phi1, std::span<const std::uint32_t> phi2) {
    Image out = img;
    apply_swaps(out.bytes(), std::span<const std::uint32_t>(swap_targets(phi1, phi2, img.dims())), true);
    return out;
}

Image inverse_permute(const Image& img, std::span<const std::uint32_t> phi1,
                      std::span<const std::uint32_t> phi2) {
    Image out = img;
    apply_swaps(out.bytes(), std::span<const std::uint32_t>(swap_targets(phi1, phi2, img.dims())), false);
    return out;
}

std::vector<std::uint32_t> net_permutation(std::span<const std::uint32_t> phi1,
                                           std::span<const std::uint32_t> phi2, Dims dims) {
    // origin[t] = source index of the element that ends up at position t
    std::vector<std::uint32_t> origin(dims.area());
    std::iota(origin.begin(), origin.end(), 0u);
    const auto targets = swap_targets(phi1, phi2, dims);
    apply_swaps(std::span<std::uint32_t>(origin), std::span<const std::uint32_t>(targets), true);
    std::vector<std::uint32_t> dest(origin.size());
    for (std::size_t t = 0; t < origin.size(); ++t) dest[origin[t]] = static_cast<std::uint32_t>(t);
    return dest;
}

Bytes confusion1(std::span<const std::uint8_t> buf, std::span<const std::uint8_t> phi3, std::uint8_t seed) {
    require_same_length(buf.size(), phi3.size(), "phi3");
    Bytes out(buf.size());
    std::uint8_t prev = seed;
    for (std::size_t k = 0; k < buf.size(); ++k) {
        const auto sum = static_cast<std::uint8_t>(buf[k] + phi3[k]);
        prev = static_cast<std::uint8_t>(phi3[k] ^ sum ^ prev);
        out[k] = prev;
    }
    return out;
}

Bytes confusion1_inverse(std::span<const std::uint8_t> buf, std::span<const std::uint8_t> phi3,
                         std::uint8_t seed) {
    require_same_length(buf.size(), phi3.size(), "phi3");
    Bytes out(buf.size());
    std::uint8_t prev = seed;
    for (std::size_t k = 0; k < buf.size(); ++k) {
        const auto masked = static_cast<std::uint8_t>(buf[k] ^ prev ^ phi3[k]);
        out[k] = static_cast<std::uint8_t>(masked - phi3[k] + 256);
        prev = buf[k];
    }
    return out;
}

Bytes confusion2(std::span<const std::uint8_t> buf, std::span<const std::uint8_t> phi4) {
    require_same_length(buf.size(), phi4.size(), "phi4");
    Bytes out(buf.size());
    for (std::size_t k = 0; k < buf.size(); ++k) out[k] = static_cast<std::uint8_t>(buf[k] ^ phi4[k]);
    return out;
}

Image encrypt_with(const Image& img, const KeystreamSet& ks, std::uint8_t seed) {
    require_keystreams(ks, img.size());
    const Image permuted = permute(img, ks.phi1, ks.phi2);
    Bytes c = confusion2(confusion1(permuted.bytes(), ks.phi3, seed), ks.phi4);
    return Image(img.rows(), img.cols(), std::move(c));
}

Image decrypt_with(const Image& cimg, const KeystreamSet& ks, std::uint8_t seed) {
    require_keystreams(ks, cimg.size());
    Bytes permuted = confusion1_inverse(confusion2(cimg.bytes(), ks.phi4), ks.phi3, seed);
    return inverse_permute(Image(cimg.rows(), cimg.cols(), std::move(permuted)), ks.phi1, ks.phi2);
}

Image encrypt(const Image& img, const SecretKey& key) {
    return encrypt_with(img, generate_keystreams(key, img.rows(), img.cols()), key.s);
}

Image decrypt(const Image& cimg, const SecretKey& key) {
    return decrypt_with(cimg, generate_keystreams(key, cimg.rows(), cimg.cols()), key.s);
}

}  // namespace cmbreak

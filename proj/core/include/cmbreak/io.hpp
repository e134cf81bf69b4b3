#pragma once

// File formats and chosen-image construction: binary PGM (P5, maxval 255),
// JSON key files with decimal-string reals, equivalent-key files, keystream
// CSV dumps and JSON renderings of the analysis reports.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmbreak/cipher.hpp"
#include "cmbreak/cryptanalysis.hpp"

namespace cmbreak {

// --- PGM -------------------------------------------------------------------

/// Parses P5 with maxval 255. Header tokens may be separated by any
/// whitespace and '#' comments. Rows = height.
Image parse_pgm(std::span<const std::uint8_t> file);
Image read_pgm(const std::filesystem::path& path);

/// Canonical "P5\n<w> <h>\n255\n" + payload.
Bytes encode_pgm(const Image& img);
void write_pgm(const Image& img, const std::filesystem::path& path);

// --- chosen plaintexts -----------------------------------------------------

Image make_constant_image(Dims dims, std::uint8_t value);

/// D_j(n) = floor(n / 256^j) mod 256 over linear index n.
Image make_digit_plane_image(Dims dims, std::size_t plane);

// --- keys ------------------------------------------------------------------

nlohmann::json key_to_json(const SecretKey& key);
SecretKey key_from_json(const nlohmann::json& j);
SecretKey read_key(const std::filesystem::path& path);
void write_key(const SecretKey& key, const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_real(double v);
double parse_real(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
Bytes base64_decode(std::string_view text);

/// JSON carries dims, phi3/phi4 as base64 and the path of the permutation
/// file (little-endian uint32 array), relative to the JSON file when possible.
void write_equivalent_key(const EquivalentKey& ek, const std::filesystem::path& json_path,
                          const std::filesystem::path& perm_path);
EquivalentKey read_equivalent_key(const std::filesystem::path& json_path);

nlohmann::json transcript_to_json(const AttackTranscript& transcript);

// --- keystream dumps -------------------------------------------------------

/// One decimal value per line.
void write_keystream_csv(std::span<const std::uint32_t> values, const std::filesystem::path& path);
void write_keystream_csv(std::span<const std::uint8_t> values, const std::filesystem::path& path);
std::vector<std::uint32_t> read_keystream_csv(const std::filesystem::path& path);

// --- misc ------------------------------------------------------------------

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace cmbreak

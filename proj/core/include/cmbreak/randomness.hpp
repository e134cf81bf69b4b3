#pragma once

// The nine-test statistical battery (NIST SP 800-22 formulations) used to
// judge the chaotic keystreams, and the batch runner that reproduces the
// pass-count table.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmbreak/cipher.hpp"

namespace cmbreak {

struct BitSequence {
    std::vector<std::uint8_t> bits;  // each 0 or 1

    std::size_t size() const noexcept { return bits.size(); }
};

/// MSB-first, 8 bits per byte.
BitSequence bytes_to_bits(std::span<const std::uint8_t> bytes);
BitSequence bits_from_string(std::string_view text);  // "0101...", other chars ignored

enum class TestId : std::uint8_t {
    frequency,
    block_frequency,
    cumulative_sums,
    runs,
    rank,
    non_overlapping_template,
    serial,
    approximate_entropy,
    fft,
};

/// Row order of the report table.
inline constexpr std::array<TestId, 9> kAllTests = {
    TestId::frequency,  TestId::block_frequency,          TestId::cumulative_sums,
    TestId::runs,       TestId::rank,                     TestId::non_overlapping_template,
    TestId::serial,     TestId::approximate_entropy,      TestId::fft,
};

struct TestParams {
    std::size_t block_frequency_m = 100;
    std::string template_bits = "110001000";
    std::size_t template_blocks = 8;
    std::size_t serial_m = 16;
    std::size_t approximate_entropy_m = 10;
};

struct TestResult {
    TestId id;
    std::string name;
    std::vector<double> p_values;
    bool pass = false;
};

std::string test_name(TestId id, const TestParams& params = {});
std::string_view test_key(TestId id) noexcept;  // stable snake_case identifier
std::optional<TestId> parse_test_key(std::string_view key) noexcept;

/// Shortest sequence the test accepts under `params`.
std::size_t minimum_length(TestId id, const TestParams& params = {});

/// Throws SequenceTooShort (context: "test", "required").
TestResult run_single_test(TestId id, const BitSequence& bits, double alpha = 0.01,
                           const TestParams& params = {});

enum class Generator : std::uint8_t { f_keystream, g_keystream, external };

std::string_view generator_label(Generator g) noexcept;

struct SuiteOptions {
    std::size_t batch = 100;
    std::size_t sample_bytes = 32768;
    double alpha = 0.01;
    std::uint64_t seed = 1;
    KeyRanges ranges;
    TestParams params;
};

struct SuiteReport {
    std::string generator;
    std::size_t batch = 0;
    std::size_t sample_bytes = 0;
    double alpha = 0.01;
    std::uint64_t seed = 0;
    std::size_t rejected_keys = 0;
    std::array<std::size_t, kAllTests.size()> passed{};

    std::size_t passed_count(TestId id) const noexcept { return passed[static_cast<std::size_t>(id)]; }
};

/// Sample source for Generator::external: returns `sample_bytes` bytes for
/// sample index i.
using ByteSource = std::function<Bytes(std::size_t index, std::size_t sample_bytes)>;

/// Keystream samples come from fresh random map triples drawn with `ranges`:
/// f -> the Confusion II stream, g -> the Confusion I stream, each quantized
/// mod 256. Triples whose orbit escapes are resampled; more than 10 x batch
/// rejections throws GeneratorExhausted.
SuiteReport run_suite(Generator generator, const SuiteOptions& opts, const ByteSource& external = {});

/// Seeded mt19937_64 bytes, the calibration source.
ByteSource reference_source(std::uint64_t seed);

/// Plain-text table: one row per test, one column per report.
std::string format_table(std::span<const SuiteReport> reports, const TestParams& params = {});

}  // namespace cmbreak

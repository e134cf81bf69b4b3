#include "cmbreak/randomness.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <iomanip>

#include <boost/math/special_functions/gamma.hpp>
#include <fftw3.h>

#include "cmbreak/keystream.hpp"

namespace cmbreak {

namespace {

double igamc(double a, double x) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(a, x);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// --- individual tests ------------------------------------------------------

double frequency(const BitSequence& s) {
    const auto n = static_cast<double>(s.size());
    double sum = 0.0;
    for (auto b : s.bits) sum += b ? 1.0 : -1.0;
    return std::erfc(std::abs(sum) / std::sqrt(n) / std::numbers::sqrt2);
}

double block_frequency(const BitSequence& s, std::size_t m) {
    const std::size_t blocks = s.size() / m;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < blocks; ++i) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < m; ++j) ones += s.bits[i * m + j];
        const double pi = static_cast<double>(ones) / static_cast<double>(m) - 0.5;
        chi2 += pi * pi;
    }
    chi2 *= 4.0 * static_cast<double>(m);
    return igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0);
}

double cumulative_sums_forward(const BitSequence& s) {
    const auto n = static_cast<double>(s.size());
    long long partial = 0;
    long long z = 0;
    for (auto b : s.bits) {
        partial += b ? 1 : -1;
        z = std::max(z, std::llabs(partial));
    }
    const auto zd = static_cast<double>(z);
    const double root_n = std::sqrt(n);
    double sum1 = 0.0;
    for (auto k = static_cast<long long>((-n / zd + 1.0) / 4.0); k <= static_cast<long long>((n / zd - 1.0) / 4.0); ++k) {
        sum1 += normal_cdf((4.0 * k + 1.0) * zd / root_n) - normal_cdf((4.0 * k - 1.0) * zd / root_n);
    }
    double sum2 = 0.0;
    for (auto k = static_cast<long long>((-n / zd - 3.0) / 4.0); k <= static_cast<long long>((n / zd - 1.0) / 4.0); ++k) {
        sum2 += normal_cdf((4.0 * k + 3.0) * zd / root_n) - normal_cdf((4.0 * k + 1.0) * zd / root_n);
    }
    return clamp01(1.0 - sum1 + sum2);
}

double runs(const BitSequence& s) {
    const auto n = static_cast<double>(s.size());
    const double pi = static_cast<double>(std::count(s.bits.begin(), s.bits.end(), 1)) / n;
    // frequency prerequisite
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) return 0.0;
    double v = 1.0;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) v += s.bits[k] != s.bits[k + 1] ? 1.0 : 0.0;
    const double q = pi * (1.0 - pi);
    return std::erfc(std::abs(v - 2.0 * n * q) / (2.0 * std::sqrt(2.0 * n) * q));
}

int gf2_rank(std::array<std::uint32_t, 32> rows) {
    int rank = 0;
    for (int col = 31; col >= 0 && rank < 32; --col) {
        const std::uint32_t bit = 1u << col;
        int pivot = -1;
        for (int r = rank; r < 32; ++r) {
            if (rows[r] & bit) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = 0; r < 32; ++r) {
            if (r != rank && (rows[r] & bit)) rows[r] ^= rows[rank];
        }
        ++rank;
    }
    return rank;
}

// Probability that a random 32 x 32 binary matrix has rank r.
double rank_probability(int r) {
    constexpr int m = 32;
    double product = 1.0;
    for (int i = 0; i < r; ++i) {
        product *= (1.0 - std::ldexp(1.0, i - m)) * (1.0 - std::ldexp(1.0, i - m)) / (1.0 - std::ldexp(1.0, i - r));
    }
    return std::ldexp(product, r * (2 * m - r) - m * m);
}

double rank(const BitSequence& s) {
    const std::size_t matrices = s.size() / 1024;
    std::size_t full = 0, minus_one = 0;
    for (std::size_t i = 0; i < matrices; ++i) {
        std::array<std::uint32_t, 32> rows{};
        for (std::size_t r = 0; r < 32; ++r) {
            std::uint32_t row = 0;
            for (std::size_t c = 0; c < 32; ++c) row = (row << 1) | s.bits[i * 1024 + r * 32 + c];
            rows[r] = row;
        }
        const int rk = gf2_rank(rows);
        if (rk == 32) ++full;
        else if (rk == 31) ++minus_one;
    }
    const auto n = static_cast<double>(matrices);
    const double p32 = rank_probability(32);
    const double p31 = rank_probability(31);
    const double p30 = 1.0 - p32 - p31;
    const double f32 = static_cast<double>(full);
    const double f31 = static_cast<double>(minus_one);
    const double f30 = n - f32 - f31;
    const double chi2 = (f32 - p32 * n) * (f32 - p32 * n) / (p32 * n) +
                        (f31 - p31 * n) * (f31 - p31 * n) / (p31 * n) +
                        (f30 - p30 * n) * (f30 - p30 * n) / (p30 * n);
    return std::exp(-chi2 / 2.0);
}

double non_overlapping_template(const BitSequence& s, const std::string& tmpl, std::size_t blocks) {
    const std::size_t m = tmpl.size();
    const std::size_t block_len = s.size() / blocks;
    const double mu = static_cast<double>(block_len - m + 1) / std::ldexp(1.0, static_cast<int>(m));
    const double var = static_cast<double>(block_len) *
                       (1.0 / std::ldexp(1.0, static_cast<int>(m)) -
                        static_cast<double>(2 * m - 1) / std::ldexp(1.0, static_cast<int>(2 * m)));
    double chi2 = 0.0;
    for (std::size_t i = 0; i < blocks; ++i) {
        const std::uint8_t* block = s.bits.data() + i * block_len;
        std::size_t hits = 0;
        std::size_t j = 0;
        while (j + m <= block_len) {
            bool match = true;
            for (std::size_t t = 0; t < m && match; ++t) match = block[j + t] == static_cast<std::uint8_t>(tmpl[t] - '0');
            if (match) {
                ++hits;
                j += m;
            } else {
                ++j;
            }
        }
        const double d = static_cast<double>(hits) - mu;
        chi2 += d * d / var;
    }
    return igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0);
}

// Frequencies of all overlapping m-bit patterns, the sequence wrapped by m-1 bits.
std::vector<std::uint32_t> pattern_counts(const BitSequence& s, std::size_t m) {
    std::vector<std::uint32_t> counts(std::size_t{1} << m, 0);
    if (m == 0) return counts;
    const std::size_t n = s.size();
    const std::size_t mask = (std::size_t{1} << m) - 1;
    std::size_t window = 0;
    for (std::size_t i = 0; i < m - 1; ++i) window = (window << 1) | s.bits[i % n];
    for (std::size_t i = 0; i < n; ++i) {
        window = ((window << 1) | s.bits[(i + m - 1) % n]) & mask;
        ++counts[window];
    }
    return counts;
}

double psi_squared(const BitSequence& s, std::size_t m) {
    if (m == 0) return 0.0;
    const auto counts = pattern_counts(s, m);
    double sum = 0.0;
    for (auto c : counts) sum += static_cast<double>(c) * static_cast<double>(c);
    const auto n = static_cast<double>(s.size());
    return std::ldexp(1.0, static_cast<int>(m)) / n * sum - n;
}

std::vector<double> serial(const BitSequence& s, std::size_t m) {
    const double p0 = psi_squared(s, m);
    const double p1 = m >= 1 ? psi_squared(s, m - 1) : 0.0;
    const double p2 = m >= 2 ? psi_squared(s, m - 2) : 0.0;
    const double del1 = p0 - p1;
    const double del2 = p0 - 2.0 * p1 + p2;
    return {igamc(std::ldexp(1.0, static_cast<int>(m) - 2), del1 / 2.0),
            igamc(std::ldexp(1.0, static_cast<int>(m) - 3), del2 / 2.0)};
}

double phi_entropy(const BitSequence& s, std::size_t m) {
    if (m == 0) return 0.0;
    const auto counts = pattern_counts(s, m);
    const auto n = static_cast<double>(s.size());
    double sum = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        sum += p * std::log(p);
    }
    return sum;
}

double approximate_entropy(const BitSequence& s, std::size_t m) {
    const double apen = phi_entropy(s, m) - phi_entropy(s, m + 1);
    const auto n = static_cast<double>(s.size());
    const double chi2 = 2.0 * n * (std::numbers::ln2 - apen);
    return igamc(std::ldexp(1.0, static_cast<int>(m) - 1), chi2 / 2.0);
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

double discrete_fourier(const BitSequence& s) {
    const std::size_t n = s.size();
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n; ++i) in[i] = s.bits[i] ? 1.0 : -1.0;
    fftw_execute(plan);
    const auto nd = static_cast<double>(n);
    const double threshold = std::sqrt(std::log(1.0 / 0.05) * nd);
    std::size_t below = 0;
    for (std::size_t j = 0; j < n / 2; ++j) {
        if (std::hypot(out[j][0], out[j][1]) < threshold) ++below;
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    const double expected = 0.95 * nd / 2.0;
    const double d = (static_cast<double>(below) - expected) / std::sqrt(nd * 0.95 * 0.05 / 4.0);
    return std::erfc(std::abs(d) / std::numbers::sqrt2);
}

}  // namespace

// ---------------------------------------------------------------------------

BitSequence bytes_to_bits(std::span<const std::uint8_t> bytes) {
    BitSequence out;
    out.bits.reserve(bytes.size() * 8);
    for (std::uint8_t b : bytes) {
        for (int i = 7; i >= 0; --i) out.bits.push_back(static_cast<std::uint8_t>((b >> i) & 1));
    }
    return out;
}

BitSequence bits_from_string(std::string_view text) {
    BitSequence out;
    for (char c : text) {
        if (c == '0' || c == '1') out.bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return out;
}

std::string_view test_key(TestId id) noexcept {
    switch (id) {
        case TestId::frequency: return "frequency";
        case TestId::block_frequency: return "block_frequency";
        case TestId::cumulative_sums: return "cumulative_sums_forward";
        case TestId::runs: return "runs";
        case TestId::rank: return "rank";
        case TestId::non_overlapping_template: return "non_overlapping_template";
        case TestId::serial: return "serial";
        case TestId::approximate_entropy: return "approximate_entropy";
        case TestId::fft: return "fft";
    }
    return "unknown";
}

std::optional<TestId> parse_test_key(std::string_view key) noexcept {
    for (TestId id : kAllTests) {
        if (test_key(id) == key) return id;
    }
    return std::nullopt;
}

std::string test_name(TestId id, const TestParams& p) {
    switch (id) {
        case TestId::frequency: return "Frequency";
        case TestId::block_frequency: return "Block Frequency (m=" + std::to_string(p.block_frequency_m) + ")";
        case TestId::cumulative_sums: return "Cumulative Sums-Forward";
        case TestId::runs: return "Runs";
        case TestId::rank: return "Rank";
        case TestId::non_overlapping_template:
            return "Non-overlapping Template (m=" + std::to_string(p.template_bits.size()) +
                   ", B=" + p.template_bits + ")";
        case TestId::serial: return "Serial (m=" + std::to_string(p.serial_m) + ")";
        case TestId::approximate_entropy:
            return "Approximate Entropy (m=" + std::to_string(p.approximate_entropy_m) + ")";
        case TestId::fft: return "FFT";
    }
    return "unknown";
}

std::size_t minimum_length(TestId id, const TestParams& p) {
    switch (id) {
        case TestId::frequency:
        case TestId::cumulative_sums:
        case TestId::runs: return 100;
        case TestId::block_frequency: return std::max<std::size_t>(100, p.block_frequency_m);
        case TestId::rank: return 38 * 1024;
        case TestId::non_overlapping_template:
            return p.template_blocks * (std::size_t{1} << p.template_bits.size());
        // m <= log2(n) - 2 and m <= log2(n) - 5 respectively
        case TestId::serial: return std::size_t{1} << (p.serial_m + 2);
        case TestId::approximate_entropy: return std::size_t{1} << (p.approximate_entropy_m + 5);
        case TestId::fft: return 1000;
    }
    return 0;
}

TestResult run_single_test(TestId id, const BitSequence& bits, double alpha, const TestParams& p) {
    const std::size_t required = minimum_length(id, p);
    if (bits.size() < required) {
        throw Error(ErrorCode::SequenceTooShort, "sequence too short for " + test_name(id, p),
                    {{"test", std::string(test_key(id))},
                     {"required", std::to_string(required)},
                     {"actual", std::to_string(bits.size())}});
    }
    TestResult r{id, test_name(id, p), {}, false};
    switch (id) {
        case TestId::frequency: r.p_values = {frequency(bits)}; break;
        case TestId::block_frequency: r.p_values = {block_frequency(bits, p.block_frequency_m)}; break;
        case TestId::cumulative_sums: r.p_values = {cumulative_sums_forward(bits)}; break;
        case TestId::runs: r.p_values = {runs(bits)}; break;
        case TestId::rank: r.p_values = {rank(bits)}; break;
        case TestId::non_overlapping_template:
            r.p_values = {non_overlapping_template(bits, p.template_bits, p.template_blocks)};
            break;
        case TestId::serial: r.p_values = serial(bits, p.serial_m); break;
        case TestId::approximate_entropy: r.p_values = {approximate_entropy(bits, p.approximate_entropy_m)}; break;
        case TestId::fft: r.p_values = {discrete_fourier(bits)}; break;
    }
    for (double& pv : r.p_values) pv = clamp01(pv);
    r.pass = std::all_of(r.p_values.begin(), r.p_values.end(), [alpha](double pv) { return pv >= alpha; });
    return r;
}

std::string_view generator_label(Generator g) noexcept {
    switch (g) {
        case Generator::f_keystream: return "f";
        case Generator::g_keystream: return "g";
        case Generator::external: return "external";
    }
    return "unknown";
}

ByteSource reference_source(std::uint64_t seed) {
    return [seed](std::size_t index, std::size_t sample_bytes) {
        std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (index + 1)));
        Bytes out(sample_bytes);
        for (std::size_t i = 0; i < sample_bytes; i += 8) {
            std::uint64_t word = rng();
            for (std::size_t j = 0; j < 8 && i + j < sample_bytes; ++j, word >>= 8) {
                out[i + j] = static_cast<std::uint8_t>(word);
            }
        }
        return out;
    };
}

SuiteReport run_suite(Generator generator, const SuiteOptions& opts, const ByteSource& external) {
    if (generator == Generator::external && !external) {
        throw Error(ErrorCode::UsageError, "external generator selected without a byte source");
    }
    SuiteReport report;
    report.generator = std::string(generator_label(generator));
    report.batch = opts.batch;
    report.sample_bytes = opts.sample_bytes;
    report.alpha = opts.alpha;
    report.seed = opts.seed;

    KeySampler sampler(opts.seed, opts.ranges);
    const std::size_t max_rejections = 10 * opts.batch;
    auto next_sample = [&](std::size_t index) -> Bytes {
        if (generator == Generator::external) return external(index, opts.sample_bytes);
        for (;;) {
            try {
                std::vector<std::uint32_t> ks;
                if (generator == Generator::f_keystream) {
                    const FTriple t = sampler.sample_f();
                    ks = orbit_keystream(t.params, t.x0, opts.sample_bytes, 256);
                } else {
                    const GTriple t = sampler.sample_g();
                    ks = orbit_keystream(t.params, t.y0, opts.sample_bytes, 256);
                }
                return Bytes(ks.begin(), ks.end());
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NonFiniteState) throw;
                if (++report.rejected_keys > max_rejections) {
                    throw Error(ErrorCode::GeneratorExhausted, "too many rejected keys while sampling",
                                {{"rejected", std::to_string(report.rejected_keys)}});
                }
            }
        }
    };

    for (std::size_t i = 0; i < opts.batch; ++i) {
        const BitSequence bits = bytes_to_bits(next_sample(i));
        for (TestId id : kAllTests) {
            if (run_single_test(id, bits, opts.alpha, opts.params).pass) ++report.passed[static_cast<std::size_t>(id)];
        }
    }
    return report;
}

std::string format_table(std::span<const SuiteReport> reports, const TestParams& params) {
    std::ostringstream out;
    constexpr int name_width = 50;
    out << std::left << std::setw(name_width) << "Name of Test";
    for (const auto& r : reports) out << " | " << std::setw(8) << r.generator;
    out << "\n" << std::string(name_width, '-');
    for (std::size_t i = 0; i < reports.size(); ++i) out << "-+---------";
    out << "\n";
    for (TestId id : kAllTests) {
        out << std::left << std::setw(name_width) << test_name(id, params);
        for (const auto& r : reports) out << " | " << std::setw(8) << r.passed_count(id);
        out << "\n";
    }
    if (!reports.empty()) {
        out << "(passed sequences out of " << reports.front().batch << ", alpha = " << reports.front().alpha << ")\n";
    }
    return out.str();
}

}  // namespace cmbreak

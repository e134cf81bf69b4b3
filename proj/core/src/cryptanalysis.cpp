#include "cmbreak/cryptanalysis.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>

#include "cmbreak/io.hpp"

namespace cmbreak {

namespace {

constexpr std::uint8_t kTopBit = 0x80;

std::uint8_t masked_add(std::uint8_t a, std::uint8_t b, std::uint8_t x) {
    return static_cast<std::uint8_t>(static_cast<std::uint8_t>(a + x) ^ static_cast<std::uint8_t>(b + x));
}

// table[y] = solutions of (a+x) ^ (b+x) == y
std::array<ByteSet, kAlphabetSize> solution_table(std::uint8_t a, std::uint8_t b) {
    std::array<ByteSet, kAlphabetSize> table;
    for (std::size_t y = 0; y < kAlphabetSize; ++y) {
        const MaskedAddConstraint c{a, b, static_cast<std::uint8_t>(y)};
        table[y] = solve_masked_add(std::span<const MaskedAddConstraint>(&c, 1));
    }
    return table;
}

// The candidate set must be exactly {x, x ^ 128}; returns x with bit 7 clear.
std::optional<std::uint8_t> top_bit_pair_representative(const ByteSet& set) {
    if (set.count() != 2) return std::nullopt;
    for (std::size_t x = 0; x < kTopBit; ++x) {
        if (set.test(x)) return set.test(x ^ kTopBit) ? std::optional(static_cast<std::uint8_t>(x)) : std::nullopt;
    }
    return std::nullopt;
}

std::string constant_descriptor(std::uint8_t v) { return "constant:" + std::to_string(v); }

Image checked_query(EncryptionOracle& oracle, const Image& plain, const std::string& descriptor,
                    AttackTranscript* transcript) {
    Image answer = oracle.query(plain);
    if (transcript) transcript->queries.push_back(descriptor);
    if (answer.dims() != oracle.dims()) {
        throw Error(ErrorCode::OracleMismatch, "oracle answered with different dimensions",
                    {{"query", descriptor},
                     {"rows", std::to_string(answer.rows())},
                     {"cols", std::to_string(answer.cols())}});
    }
    return answer;
}

void require_area(std::size_t expected, std::size_t actual, const char* what) {
    if (expected != actual) {
        throw Error(ErrorCode::LengthMismatch, std::string(what) + ": length mismatch",
                    {{"expected", std::to_string(expected)}, {"actual", std::to_string(actual)}});
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Oracles

InProcessOracle::InProcessOracle(const SecretKey& key, Dims dims)
    : dims_(dims), keystreams_(generate_keystreams(key, dims.rows, dims.cols)), seed_(key.s) {}

Image InProcessOracle::query(const Image& plain) {
    if (plain.dims() != dims_) {
        throw Error(ErrorCode::DimensionMismatch, "chosen plaintext has the wrong dimensions");
    }
    ++queries_;
    return encrypt_with(plain, keystreams_, seed_);
}

FileExchangeOracle::FileExchangeOracle(Dims dims, Options opts) : dims_(dims), opts_(std::move(opts)) {
    std::filesystem::create_directories(opts_.outbox);
    std::filesystem::create_directories(opts_.inbox);
}

Image FileExchangeOracle::query(const Image& plain) {
    namespace fs = std::filesystem;
    char name[32];
    std::snprintf(name, sizeof name, "query_%03zu.pgm", next_++);
    const fs::path in = opts_.outbox / name;
    const fs::path out = opts_.inbox / name;
    std::error_code ec;
    fs::remove(out, ec);
    write_pgm(plain, in);

    if (opts_.responder) {
        std::string cmd = *opts_.responder;
        auto substitute = [&cmd](const std::string& token, const std::string& value) {
            for (auto pos = cmd.find(token); pos != std::string::npos; pos = cmd.find(token, pos + value.size())) {
                cmd.replace(pos, token.size(), value);
            }
        };
        substitute("{in}", in.string());
        substitute("{out}", out.string());
        if (const int rc = std::system(cmd.c_str()); rc != 0) {
            throw Error(ErrorCode::IoError, "responder command failed",
                        {{"command", cmd}, {"status", std::to_string(rc)}});
        }
    }

    const auto deadline = std::chrono::steady_clock::now() + opts_.timeout;
    for (;;) {
        if (fs::exists(out)) {
            try {
                return read_pgm(out);
            } catch (const Error& e) {
                // a partially written answer parses as truncated; keep polling
                if (e.code() != ErrorCode::ParseError) throw;
            }
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            throw Error(ErrorCode::IoError, "timed out waiting for oracle answer", {{"path", out.string()}});
        }
        std::this_thread::sleep_for(opts_.poll);
    }
}

// ---------------------------------------------------------------------------
// Phase 1

ByteSet solve_masked_add(std::span<const MaskedAddConstraint> constraints) {
    if (constraints.empty()) throw Error(ErrorCode::DomainError, "constraint list must be non-empty");
    ByteSet out;
    for (std::size_t x = 0; x < kAlphabetSize; ++x) {
        const auto xb = static_cast<std::uint8_t>(x);
        const bool ok = std::all_of(constraints.begin(), constraints.end(), [xb](const MaskedAddConstraint& c) {
            return masked_add(c.a, c.b, xb) == c.y;
        });
        out.set(x, ok);
    }
    return out;
}

PairSet default_pairs() { return {{9, 127}, {1, 52}, {33, 65}}; }

bool pairs_pin_uniquely(const PairSet& pairs) {
    if (pairs.empty()) return false;
    std::vector<MaskedAddConstraint> cs(pairs.size());
    for (std::size_t x = 0; x < kAlphabetSize; ++x) {
        const auto xb = static_cast<std::uint8_t>(x);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            cs[i] = {pairs[i].first, pairs[i].second, masked_add(pairs[i].first, pairs[i].second, xb)};
        }
        ByteSet expected;
        expected.set(x);
        expected.set(x ^ kTopBit);
        if (solve_masked_add(cs) != expected) return false;
    }
    return true;
}

std::vector<std::uint8_t> constant_values(const PairSet& pairs) {
    std::vector<std::uint8_t> values;
    for (const auto& [a, b] : pairs) {
        for (std::uint8_t v : {a, b}) {
            if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
        }
    }
    return values;
}

std::size_t digit_planes_needed(std::size_t area) {
    std::size_t d = 0;
    for (std::size_t capacity = 1; capacity < area; capacity *= kAlphabetSize) ++d;
    return d;
}

Bytes solve_phi3(const std::map<std::uint8_t, Image>& constant_ciphers, const PairSet& pairs) {
    if (pairs.empty()) throw Error(ErrorCode::UsageError, "pair set is empty");
    auto cipher_of = [&](std::uint8_t v) -> const Image& {
        auto it = constant_ciphers.find(v);
        if (it == constant_ciphers.end()) {
            throw Error(ErrorCode::OracleMismatch, "missing cipher image for constant plaintext",
                        {{"value", std::to_string(v)}});
        }
        return it->second;
    };
    const std::size_t n = cipher_of(pairs.front().first).size();

    struct PairView {
        std::span<const std::uint8_t> ca, cb;
        std::array<ByteSet, kAlphabetSize> table;
    };
    std::vector<PairView> views;
    for (const auto& [a, b] : pairs) {
        const Image& ca = cipher_of(a);
        const Image& cb = cipher_of(b);
        require_area(n, ca.size(), "constant cipher");
        require_area(n, cb.size(), "constant cipher");
        views.push_back({ca.bytes(), cb.bytes(), solution_table(a, b)});
    }

    Bytes phi3(n);
    for (std::size_t k = 0; k < n; ++k) {
        ByteSet candidates;
        candidates.set();
        for (const auto& v : views) {
            // both chains start from the same seed, so the k = 0 carry-in is 0
            const std::uint8_t prev = k == 0 ? 0 : static_cast<std::uint8_t>(v.ca[k - 1] ^ v.cb[k - 1]);
            const auto y = static_cast<std::uint8_t>(v.ca[k] ^ v.cb[k] ^ prev);
            candidates &= v.table[y];
        }
        if (candidates.none()) {
            throw Error(ErrorCode::OracleMismatch, "oracle answers are inconsistent at a position",
                        {{"k", std::to_string(k)}});
        }
        const auto rep = top_bit_pair_representative(candidates);
        if (!rep) {
            throw Error(ErrorCode::AmbiguousPosition, "keystream byte not pinned to {x, x^128}",
                        {{"k", std::to_string(k)}, {"candidates", std::to_string(candidates.count())}});
        }
        phi3[k] = *rep;
    }
    return phi3;
}

Phi3Recovery recover_phi3(EncryptionOracle& oracle, const PairSet& pairs, AttackTranscript* transcript) {
    if (!pairs_pin_uniquely(pairs)) {
        throw Error(ErrorCode::UsageError, "pair set does not pin every byte to {x, x^128}");
    }
    const Dims dims = oracle.dims();
    if (dims.area() == 0) throw Error(ErrorCode::OracleMismatch, "oracle reports an empty image size");

    Phi3Recovery out;
    for (std::uint8_t v : constant_values(pairs)) {
        out.constant_ciphers.emplace(v, checked_query(oracle, make_constant_image(dims, v),
                                                      constant_descriptor(v), transcript));
    }
    out.phi3_rep = solve_phi3(out.constant_ciphers, pairs);
    return out;
}

// ---------------------------------------------------------------------------
// Phase 2

Bytes recover_phi4(const Image& constant_cipher, std::span<const std::uint8_t> phi3_rep, std::uint8_t value) {
    require_area(constant_cipher.size(), phi3_rep.size(), "phi3");
    // Chain with seed 0; the real seed S survives as a constant XOR on every
    // output byte and is absorbed into the recovered phi4.
    const Bytes plain(constant_cipher.size(), value);
    const Bytes chain = confusion1(plain, phi3_rep, 0);
    return confusion2(constant_cipher.bytes(), chain);
}

// ---------------------------------------------------------------------------
// Phase 3

std::vector<std::uint32_t> decode_permutation(std::span<const Image> plane_ciphers,
                                              std::span<const std::uint8_t> phi3_rep,
                                              std::span<const std::uint8_t> phi4_abs) {
    const std::size_t n = phi3_rep.size();
    require_area(n, phi4_abs.size(), "phi4");
    std::vector<std::uint64_t> code(n, 0);
    std::uint64_t weight = 1;
    for (const Image& c : plane_ciphers) {
        require_area(n, c.size(), "digit-plane cipher");
        const Bytes plane = confusion1_inverse(confusion2(c.bytes(), phi4_abs), phi3_rep, 0);
        for (std::size_t t = 0; t < n; ++t) code[t] += plane[t] * weight;
        weight *= kAlphabetSize;
    }

    constexpr auto kUnset = static_cast<std::uint32_t>(-1);
    std::vector<std::uint32_t> perm(n, kUnset);
    for (std::size_t t = 0; t < n; ++t) {
        const std::uint64_t s = code[t];
        if (s >= n) {
            throw Error(ErrorCode::CodeOutOfRange, "decoded source index out of range",
                        {{"t", std::to_string(t)}, {"code", std::to_string(s)}});
        }
        if (perm[s] != kUnset) {
            throw Error(ErrorCode::NotBijective, "two positions decode to the same source index",
                        {{"code", std::to_string(s)}, {"t", std::to_string(t)}});
        }
        perm[s] = static_cast<std::uint32_t>(t);
    }
    return perm;
}

std::vector<std::uint32_t> recover_permutation(EncryptionOracle& oracle, std::span<const std::uint8_t> phi3_rep,
                                               std::span<const std::uint8_t> phi4_abs,
                                               AttackTranscript* transcript) {
    const Dims dims = oracle.dims();
    require_area(dims.area(), phi3_rep.size(), "phi3");
    const std::size_t d = digit_planes_needed(dims.area());
    std::vector<Image> planes;
    planes.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
        planes.push_back(checked_query(oracle, make_digit_plane_image(dims, j),
                                       "digit-plane:" + std::to_string(j), transcript));
    }
    return decode_permutation(planes, phi3_rep, phi4_abs);
}

// ---------------------------------------------------------------------------

void EquivalentKey::validate() const {
    const std::size_t n = dims.area();
    require_area(n, phi3_rep.size(), "phi3");
    require_area(n, phi4_abs.size(), "phi4");
    require_area(n, perm.size(), "perm");
    for (std::size_t k = 0; k < n; ++k) {
        if (phi3_rep[k] & kTopBit) {
            throw Error(ErrorCode::DomainError, "phi3 representative must have bit 7 clear",
                        {{"k", std::to_string(k)}});
        }
    }
    std::vector<bool> seen(n, false);
    for (std::uint32_t t : perm) {
        if (t >= n || seen[t]) throw Error(ErrorCode::NotBijective, "permutation is not a bijection");
        seen[t] = true;
    }
}

Image encrypt_with_equivalent(const Image& img, const EquivalentKey& ek) {
    if (img.dims() != ek.dims) throw Error(ErrorCode::DimensionMismatch, "image does not match key dimensions");
    Bytes permuted(img.size());
    for (std::size_t s = 0; s < img.size(); ++s) permuted[ek.perm[s]] = img[s];
    return Image(img.rows(), img.cols(), confusion2(confusion1(permuted, ek.phi3_rep, 0), ek.phi4_abs));
}

Image decrypt_with_equivalent(const Image& cimg, const EquivalentKey& ek) {
    if (cimg.dims() != ek.dims) throw Error(ErrorCode::DimensionMismatch, "image does not match key dimensions");
    const Bytes permuted = confusion1_inverse(confusion2(cimg.bytes(), ek.phi4_abs), ek.phi3_rep, 0);
    Bytes plain(cimg.size());
    for (std::size_t s = 0; s < plain.size(); ++s) plain[s] = permuted[ek.perm[s]];
    return Image(cimg.rows(), cimg.cols(), std::move(plain));
}

AttackResult run_differential_attack(EncryptionOracle& oracle, const AttackOptions& opts) {
    AttackResult result;
    AttackTranscript& tr = result.transcript;
    EquivalentKey& ek = result.key;
    tr.dims = oracle.dims();
    ek.dims = tr.dims;

    auto phase = [&tr](const char* name, auto&& body) {
        const std::size_t before = tr.queries.size();
        try {
            body();
        } catch (const Error& e) {
            tr.phases.push_back({name, false, tr.queries.size() - before, e.what()});
            throw AttackError(e, tr);
        }
        tr.phases.push_back({name, true, tr.queries.size() - before, {}});
    };

    Phi3Recovery p1;
    phase("confusion1", [&] {
        p1 = recover_phi3(oracle, opts.pairs, &tr);
        ek.phi3_rep = p1.phi3_rep;
    });
    phase("confusion2", [&] {
        const std::uint8_t v = opts.pairs.front().first;
        ek.phi4_abs = recover_phi4(p1.constant_ciphers.at(v), ek.phi3_rep, v);
        // Every phase-1 answer must be reproduced by the partial key; a
        // non-deterministic oracle fails here without spending a query.
        for (const auto& [value, cipher] : p1.constant_ciphers) {
            const Bytes chain = confusion1(Bytes(cipher.size(), value), ek.phi3_rep, 0);
            if (confusion2(chain, ek.phi4_abs) != cipher.data()) {
                throw Error(ErrorCode::OracleMismatch, "oracle answers are not mutually consistent",
                            {{"value", std::to_string(value)}});
            }
        }
    });
    phase("permutation", [&] {
        ek.perm = recover_permutation(oracle, ek.phi3_rep, ek.phi4_abs, &tr);
        ek.validate();
    });
    return result;
}

}  // namespace cmbreak

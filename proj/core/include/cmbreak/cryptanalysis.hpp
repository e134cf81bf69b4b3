#pragma once

// Differential chosen-plaintext attack on the composition-map cipher.
//
// Phase 1 sends six constant images and solves y = (a+x) ^ (b+x) per position
// to pin phi3 up to its top bit. Phase 2 reuses the constant-9 answer to strip
// Confusion II. Phase 3 sends ceil(log256(MN)) digit-plane images whose
// decoded values tag every source position, giving the net permutation.

#include <bitset>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmbreak/cipher.hpp"

namespace cmbreak {

inline constexpr std::size_t kAlphabetSize = 256;

/// Encrypts chosen plaintexts under a fixed hidden key. Implementations must
/// be deterministic.
class EncryptionOracle {
public:
    virtual ~EncryptionOracle() = default;
    virtual Dims dims() const = 0;
    virtual Image query(const Image& plain) = 0;
};

class InProcessOracle final : public EncryptionOracle {
public:
    InProcessOracle(const SecretKey& key, Dims dims);

    Dims dims() const override { return dims_; }
    Image query(const Image& plain) override;
    std::size_t queries() const noexcept { return queries_; }

    /// Ground truth for tests.
    const KeystreamSet& keystreams() const noexcept { return keystreams_; }
    std::uint8_t seed() const noexcept { return seed_; }

private:
    Dims dims_;
    KeystreamSet keystreams_;
    std::uint8_t seed_;
    std::size_t queries_ = 0;
};

/// Writes each chosen plaintext to `outbox/query_NNN.pgm` and reads the
/// matching cipher image from `inbox/query_NNN.pgm`. When a responder command
/// is set it is run after each write with `{in}` and `{out}` substituted;
/// otherwise the oracle polls the inbox until the timeout elapses.
class FileExchangeOracle final : public EncryptionOracle {
public:
    struct Options {
        std::filesystem::path outbox;
        std::filesystem::path inbox;
        std::optional<std::string> responder;
        std::chrono::milliseconds timeout{std::chrono::seconds(60)};
        std::chrono::milliseconds poll{std::chrono::milliseconds(50)};
    };

    FileExchangeOracle(Dims dims, Options opts);

    Dims dims() const override { return dims_; }
    Image query(const Image& plain) override;

private:
    Dims dims_;
    Options opts_;
    std::size_t next_ = 0;
};

struct MaskedAddConstraint {
    std::uint8_t a;
    std::uint8_t b;
    std::uint8_t y;
};

using ByteSet = std::bitset<kAlphabetSize>;
using PairSet = std::vector<std::pair<std::uint8_t, std::uint8_t>>;

/// All x with ((a+x) mod 256) ^ ((b+x) mod 256) == y for every constraint.
ByteSet solve_masked_add(std::span<const MaskedAddConstraint> constraints);

/// (9,127), (1,52), (33,65)
PairSet default_pairs();

/// True when, for every x, the pair set's constraints leave exactly {x, x^128}.
bool pairs_pin_uniquely(const PairSet& pairs);

/// Distinct plaintext values of a pair set in first-use order; the first is
/// the value whose cipher image phase 2 reuses.
std::vector<std::uint8_t> constant_values(const PairSet& pairs);

/// ceil(log_256(area)), computed in integers.
std::size_t digit_planes_needed(std::size_t area);

struct PhaseStatus {
    std::string name;
    bool ok = false;
    std::size_t queries = 0;
    std::string detail;
};

struct AttackTranscript {
    Dims dims;
    std::vector<std::string> queries;  // chosen-image descriptors, in issue order
    std::vector<PhaseStatus> phases;

    std::size_t total_queries() const noexcept { return queries.size(); }
};

/// Attacker-side surrogate key: decrypts exactly like the true key.
struct EquivalentKey {
    Dims dims;
    Bytes phi3_rep;                  // bit 7 clear
    Bytes phi4_abs;                  // phi4 ^ S
    std::vector<std::uint32_t> perm; // source index -> permuted position

    /// Throws LengthMismatch / NotBijective / AmbiguousPosition on a broken key.
    void validate() const;
};

/// Thrown by run_differential_attack; carries the transcript up to the failure.
class AttackError : public Error {
public:
    AttackError(const Error& cause, AttackTranscript transcript)
        : Error(cause), transcript_(std::move(transcript)) {}

    const AttackTranscript& transcript() const noexcept { return transcript_; }

private:
    AttackTranscript transcript_;
};

/// Pure part of phase 1: per-position solve over cipher images of constant
/// plaintexts. Missing a value needed by `pairs` is an OracleMismatch.
Bytes solve_phi3(const std::map<std::uint8_t, Image>& constant_ciphers, const PairSet& pairs);

struct Phi3Recovery {
    Bytes phi3_rep;
    std::map<std::uint8_t, Image> constant_ciphers;
};

Phi3Recovery recover_phi3(EncryptionOracle& oracle, const PairSet& pairs = default_pairs(),
                          AttackTranscript* transcript = nullptr);

/// phi4 ^ S from the cipher image of the constant-`value` plaintext.
Bytes recover_phi4(const Image& constant_cipher, std::span<const std::uint8_t> phi3_rep,
                   std::uint8_t value = 9);

/// Pure part of phase 3. `plane_ciphers[j]` answers digit plane j.
std::vector<std::uint32_t> decode_permutation(std::span<const Image> plane_ciphers,
                                              std::span<const std::uint8_t> phi3_rep,
                                              std::span<const std::uint8_t> phi4_abs);

std::vector<std::uint32_t> recover_permutation(EncryptionOracle& oracle, std::span<const std::uint8_t> phi3_rep,
                                               std::span<const std::uint8_t> phi4_abs,
                                               AttackTranscript* transcript = nullptr);

struct AttackOptions {
    PairSet pairs = default_pairs();
};

struct AttackResult {
    EquivalentKey key;
    AttackTranscript transcript;
};

/// Runs all three phases with 6 + ceil(log256(MN)) queries. Throws AttackError.
AttackResult run_differential_attack(EncryptionOracle& oracle, const AttackOptions& opts = {});

Image encrypt_with_equivalent(const Image& img, const EquivalentKey& ek);
Image decrypt_with_equivalent(const Image& cimg, const EquivalentKey& ek);

}  // namespace cmbreak

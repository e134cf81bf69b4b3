#pragma once

#include <cstdint>
#include <random>

#include "cmbreak/chaos_core.hpp"

namespace cmbreak {

struct FTriple {
    double x0;
    FMapParams params;

    friend bool operator==(const FTriple&, const FTriple&) = default;
};

struct GTriple {
    double y0;
    GMapParams params;

    friend bool operator==(const GTriple&, const GTriple&) = default;
};

/// Three f-map triples (permutation rows, permutation cols, Confusion II
/// stream), one g-map triple (Confusion I stream) and the chain seed S.
struct SecretKey {
    FTriple f1;
    FTriple f2;
    FTriple f3;
    GTriple g;
    std::uint8_t s;

    /// The exemplar key the attack experiments run against.
    static SecretKey exemplar_key();

    friend bool operator==(const SecretKey&, const SecretKey&) = default;
};

struct SampleRange {
    double lo;
    double hi;
};

/// Declared key distribution. Initial conditions are drawn from (lo, hi],
/// control parameters from [lo, hi). The defaults bracket the exemplar key.
struct KeyRanges {
    SampleRange x0{0.0, 1000.0};
    SampleRange alpha1{1.0, 4.0};
    SampleRange alpha2{1.0, 5.0};
    SampleRange y0{0.0, 1000.0};
    SampleRange alpha3{1.0, 100.0};
    SampleRange alpha4{1.0, 300.0};
};

/// Seeded uniform key sampler. Keys are not checked for usability here.
class KeySampler {
public:
    explicit KeySampler(std::uint64_t seed, KeyRanges ranges = {}) : rng_(seed), ranges_(ranges) {}

    SecretKey operator()();
    FTriple sample_f();
    GTriple sample_g();

private:
    double initial_condition(const SampleRange& r);
    double parameter(const SampleRange& r);

    std::mt19937_64 rng_;
    KeyRanges ranges_;
};

}  // namespace cmbreak

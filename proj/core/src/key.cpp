#include "cmbreak/key.hpp"

namespace cmbreak {

SecretKey SecretKey::exemplar_key() {
    return SecretKey{
        .f1 = {25.687, {2.10155, 3.569221}},
        .f2 = {574.461, {1.8874, 4.23562}},
        .f3 = {814.217217, {2.8912, 3.89954}},
        .g = {79.82, {61.522, 257.26223}},
        .s = 33,
    };
}

double KeySampler::initial_condition(const SampleRange& r) {
    return r.hi - std::uniform_real_distribution<double>(0.0, r.hi - r.lo)(rng_);
}

double KeySampler::parameter(const SampleRange& r) {
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng_);
}

FTriple KeySampler::sample_f() {
    const double x0 = initial_condition(ranges_.x0);
    const double a1 = parameter(ranges_.alpha1);
    const double a2 = parameter(ranges_.alpha2);
    return {x0, {a1, a2}};
}

GTriple KeySampler::sample_g() {
    const double y0 = initial_condition(ranges_.y0);
    const double a3 = parameter(ranges_.alpha3);
    const double a4 = parameter(ranges_.alpha4);
    return {y0, {a3, a4}};
}

SecretKey KeySampler::operator()() {
    FTriple f1 = sample_f();
    FTriple f2 = sample_f();
    FTriple f3 = sample_f();
    GTriple g = sample_g();
    const auto s = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(0, 255)(rng_));
    return {f1, f2, f3, g, s};
}

}  // namespace cmbreak

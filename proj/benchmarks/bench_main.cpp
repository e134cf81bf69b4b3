#include <benchmark/benchmark.h>

#include <random>

#include "cmbreak/cipher.hpp"
#include "cmbreak/cryptanalysis.hpp"
#include "cmbreak/keystream.hpp"
#include "cmbreak/randomness.hpp"

using namespace cmbreak;

namespace {

Image noise_image(std::size_t rows, std::size_t cols) {
    std::mt19937_64 rng(11);
    Bytes data(rows * cols);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    return Image(rows, cols, std::move(data));
}

void BM_Keystreams(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const SecretKey key = SecretKey::exemplar_key();
    for (auto _ : state) benchmark::DoNotOptimize(generate_keystreams(key, side, side));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side * side));
}
BENCHMARK(BM_Keystreams)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_EncryptWithKeystreams(benchmark::State& state) {
    const SecretKey key = SecretKey::exemplar_key();
    const KeystreamSet ks = generate_keystreams(key, 512, 512);
    const Image img = noise_image(512, 512);
    for (auto _ : state) benchmark::DoNotOptimize(encrypt_with(img, ks, key.s));
    state.SetBytesProcessed(state.iterations() * 512 * 512);
}
BENCHMARK(BM_EncryptWithKeystreams)->Unit(benchmark::kMillisecond);

void BM_Attack(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const SecretKey key = SecretKey::exemplar_key();
    for (auto _ : state) {
        InProcessOracle oracle(key, {side, side});
        benchmark::DoNotOptimize(run_differential_attack(oracle));
    }
}
BENCHMARK(BM_Attack)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SuiteSample(benchmark::State& state) {
    std::mt19937_64 rng(3);
    Bytes data(32768);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    const BitSequence bits = bytes_to_bits(data);
    for (auto _ : state) {
        for (TestId id : kAllTests) benchmark::DoNotOptimize(run_single_test(id, bits));
    }
}
BENCHMARK(BM_SuiteSample)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

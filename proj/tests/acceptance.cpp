// Acceptance run: one PASS/FAIL line per criterion with the measured numbers
// behind it. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cmbreak/chaos_core.hpp"
#include "cmbreak/cryptanalysis.hpp"
#include "cmbreak/diffusion.hpp"
#include "cmbreak/io.hpp"
#include "cmbreak/randomness.hpp"
#include "support.hpp"

using namespace cmbreak;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream note;
    std::string why;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            why += (why.empty() ? "" : ", ") + what;
        }
    }
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void run(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget_s > 0 && secs >= budget_s) {
        o.require(false, "over the " + std::to_string(static_cast<int>(budget_s)) + " s budget");
    }
    if (!o.pass) ++failures;
    std::printf("%s  %2d  %-40s %7.2f s  %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.note.str().c_str());
    if (!o.pass) std::printf("          why: %s\n", o.why.c_str());
    std::fflush(stdout);
}

bool within_top_bit(const Bytes& rep, const Bytes& truth) {
    if (rep.size() != truth.size()) return false;
    for (std::size_t k = 0; k < rep.size(); ++k) {
        if (rep[k] != truth[k] && rep[k] != (truth[k] ^ 0x80)) return false;
    }
    return true;
}

}  // namespace

int main() {
    run(1, "cipher round trip", 5.0, [](Outcome& o) {
        KeySampler sampler(101);
        std::mt19937_64 rng(102);
        const std::vector<Dims> sizes = {{1, 1}, {7, 3}, {16, 16}, {64, 64}};
        std::size_t ok = 0, total = 0;
        for (int i = 0; i < 50; ++i) {
            // A key whose orbits survive 64x64 also survives every shorter prefix.
            const SecretKey key = cmtest::usable_key(sampler, {64, 64});
            for (Dims d : sizes) {
                const Image img = cmtest::random_image(rng, d);
                ok += decrypt(encrypt(img, key), key) == img;
                ++total;
            }
        }
        o.note << ok << "/" << total << " exact";
        o.require(ok == total, "round trip mismatch");
    });

    run(2, "masked-add solver pins {x, x^128}", 1.0, [](Outcome& o) {
        const PairSet pairs = {{9, 127}, {1, 52}, {33, 65}};
        std::size_t exact = 0;
        for (int x = 0; x < 256; ++x) {
            std::vector<MaskedAddConstraint> cs;
            for (auto [a, b] : pairs) {
                cs.push_back({a, b, static_cast<std::uint8_t>(cmtest::add256(a, x) ^ cmtest::add256(b, x))});
            }
            const ByteSet s = solve_masked_add(cs);
            exact += s.count() == 2 && s[x] && s[x ^ 0x80];
        }
        o.note << exact << "/256 exact";
        o.require(exact == 256, "solution set differs");
    });

    run(3, "(a^128)+b == (a+b)^128 over all 65536 pairs", 1.0, [](Outcome& o) {
        std::size_t ok = 0;
        for (int a = 0; a < 256; ++a)
            for (int b = 0; b < 256; ++b) ok += cmtest::add256(a ^ 0x80, b) == (cmtest::add256(a, b) ^ 0x80);
        o.note << ok << "/65536";
        o.require(ok == 65536, "identity violated");
    });

    // Shared by 4 and 6.
    std::vector<std::string> granularity;

    run(4, "attack, 64x64 random key", 10.0, [&](Outcome& o) {
        KeySampler sampler(404);
        const Dims d{64, 64};
        const SecretKey key = cmtest::usable_key(sampler, d);
        InProcessOracle oracle(key, d);
        const AttackResult r = run_differential_attack(oracle);
        std::mt19937_64 rng(405);
        std::size_t ok = 0, agree = 0;
        for (int i = 0; i < 20; ++i) {
            const Image img = cmtest::random_image(rng, d);
            const Image c = encrypt(img, key);
            const Image p = decrypt_with_equivalent(c, r.key);
            ok += p == img;
            agree += p == decrypt(c, key);
        }
        o.note << r.transcript.total_queries() << " queries, " << ok << "/20 exact";
        o.require(r.transcript.total_queries() == 8 && oracle.queries() == 8, "query count");
        o.require(ok == 20, "decryption mismatch");
        const KeystreamSet& ks = oracle.keystreams();
        std::ostringstream g;
        g << "64x64 random key: phi3 " << (within_top_bit(r.key.phi3_rep, ks.phi3) ? "ok" : "BAD") << ", decrypt "
          << agree << "/20";
        bool absorbed = r.key.phi4_abs.size() == ks.phi4.size();
        for (std::size_t k = 0; absorbed && k < ks.phi4.size(); ++k)
            absorbed = r.key.phi4_abs[k] == (ks.phi4[k] ^ oracle.seed());
        g << ", phi4^S " << (absorbed ? "ok" : "BAD");
        granularity.push_back(g.str());
        if (!within_top_bit(r.key.phi3_rep, ks.phi3) || agree != 20 || !absorbed) granularity.push_back("FAIL");
    });

    run(5, "attack, 512x512 exemplar key", 120.0, [&](Outcome& o) {
        const Dims d{512, 512};
        const SecretKey key = SecretKey::exemplar_key();
        InProcessOracle oracle(key, d);
        const AttackResult r = run_differential_attack(oracle);
        std::mt19937_64 rng(505);
        const Image scene = cmtest::synthetic_scene(rng, d);
        const Image c = encrypt(scene, key);
        const Image p = decrypt_with_equivalent(c, r.key);
        std::size_t wrong = 0;
        for (std::size_t k = 0; k < scene.size(); ++k) wrong += p[k] != scene[k];
        o.note << r.transcript.total_queries() << " queries, " << wrong << " wrong pixels";
        o.require(r.transcript.total_queries() == 9 && oracle.queries() == 9, "query count");
        o.require(wrong == 0, "scene not recovered");

        const KeystreamSet& ks = oracle.keystreams();
        const Image truth = decrypt(c, key);
        const Image nine(512, 512, 9);
        const bool agree = p == truth && decrypt_with_equivalent(encrypt(nine, key), r.key) == nine;
        bool absorbed = true;
        for (std::size_t k = 0; k < ks.phi4.size(); ++k) absorbed = absorbed && r.key.phi4_abs[k] == (ks.phi4[k] ^ 33);
        std::ostringstream g;
        g << "512x512 exemplar key: phi3 " << (within_top_bit(r.key.phi3_rep, ks.phi3) ? "ok" : "BAD") << ", decrypt "
          << (agree ? "ok" : "BAD") << ", phi4^S " << (absorbed ? "ok" : "BAD");
        granularity.push_back(g.str());
        if (!within_top_bit(r.key.phi3_rep, ks.phi3) || !agree || !absorbed) granularity.push_back("FAIL");
    });

    run(6, "phi3/phi4 recovery granularity", 0.0, [&](Outcome& o) {
        bool bad = granularity.size() < 2;
        const char* sep = "";
        for (const auto& g : granularity) {
            if (g == "FAIL") {
                bad = true;
            } else {
                o.note << sep << g;
                sep = "; ";
            }
        }
        o.require(!bad, "a recovery run disagreed with ground truth");
    });

    run(7, "diffusion plane containment", 30.0, [](Outcome& o) {
        KeySampler sampler(707);
        std::mt19937_64 rng(708);
        const Dims d{32, 32};
        std::size_t contained = 0, immune = 0;
        for (int i = 0; i < 20; ++i) {
            const SecretKey key = cmtest::usable_key(sampler, d);
            const Image img = cmtest::random_image(rng, d);
            const std::size_t row = rng() % d.rows, col = rng() % d.cols;
            const unsigned b = static_cast<unsigned>(rng() % 8);
            const DiffReport r = bit_flip_diff(key, img, row, col, b);
            bool below = true;
            for (unsigned p = 0; p < b; ++p) below = below && r.counts[p] == 0;
            contained += below;
            const KeystreamSet ks = generate_keystreams(key, d.rows, d.cols);
            const std::size_t t0 = net_permutation(ks.phi1, ks.phi2, d)[row * d.cols + col];
            immune += r.first_changed.has_value() && *r.first_changed >= t0;
        }
        o.note << "containment " << contained << "/20, prefix immunity " << immune << "/20";
        o.require(contained == 20 && immune == 20, "random cases");

        const Image plane2 = make_digit_plane_image({512, 512}, 2);
        const DiffReport big = bit_flip_diff(SecretKey::exemplar_key(), plane2, 256, 256, 5);
        const PlaneSummary s = plane_change_summary(big);
        o.note << "; 512x512 bit 5 plane counts";
        for (const auto& row : s.rows) o.note << " " << row.count;
        bool low_empty = true;
        for (unsigned p = 0; p < 5; ++p) low_empty = low_empty && s.rows[p].count == 0;
        o.require(low_empty, "planes 0-4 changed");
        o.require(s.lowest_changed == 5u, "lowest changed plane is not 5");
        o.note << ", changed fraction " << big.changed_fraction();
    });

    run(8, "randomness suite calibration", 0.0, [](Outcome& o) {
        SuiteOptions opts;
        opts.seed = 808;
        const SuiteReport r = run_suite(Generator::external, opts, reference_source(808));
        o.note << "reference passes:";
        for (TestId id : kAllTests) {
            o.note << " " << r.passed_count(id);
            o.require(r.passed_count(id) >= 95, std::string(test_key(id)) + " < 95");
        }
        const BitSequence zeros{std::vector<std::uint8_t>(opts.sample_bytes * 8, 0)};
        std::size_t failed = 0;
        for (TestId id : kAllTests) failed += !run_single_test(id, zeros).pass;
        o.note << "; all-zero fails " << failed << "/9";
        o.require(failed == 9, "an all-zero sample passed");
    });

    run(9, "keystream battery pass-count pattern", 600.0, [](Outcome& o) {
        SuiteOptions opts;
        opts.seed = 2024;
        const std::vector<TestId> weak = {TestId::frequency, TestId::cumulative_sums, TestId::runs, TestId::serial,
                                          TestId::approximate_entropy};
        const std::vector<TestId> strong = {TestId::rank, TestId::non_overlapping_template};
        o.note << "pass counts in table order, ";
        for (Generator g : {Generator::f_keystream, Generator::g_keystream}) {
            const SuiteReport r = run_suite(g, opts);
            o.note << r.generator << ":";
            for (TestId id : kAllTests) o.note << " " << r.passed_count(id);
            o.note << " (rejected " << r.rejected_keys << ")" << (g == Generator::f_keystream ? "; " : "");
            for (TestId id : weak) {
                o.require(r.passed_count(id) <= 20, r.generator + " " + std::string(test_key(id)) + " > 20");
            }
            for (TestId id : strong) {
                o.require(r.passed_count(id) >= 40, r.generator + " " + std::string(test_key(id)) + " < 40");
            }
        }
    });

    run(10, "Lyapunov calibration and sweep", 60.0, [](Outcome& o) {
        std::mt19937_64 rng(1010);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            double x0 = u(rng);
            while (x0 <= 0.0) x0 = u(rng);
            const double l = lyapunov_exponent(LogisticParams{4.0}, x0, {1000, 100000});
            worst = std::max(worst, std::abs(l - std::numbers::ln2));
        }
        o.note << "max |lambda - ln2| " << worst;
        o.require(worst <= 0.05, "logistic calibration");
        const SweepResult s = lyapunov_sweep(MapKind::f, {1.0, 4.0, 50}, {1.0, 5.0, 50}, 25.687);
        o.note << "; sweep fraction positive " << s.fraction_positive() << " (" << s.escaped_count << " escaped)";
        o.require(s.fraction_positive() > 0.0 && s.fraction_positive() < 1.0, "sweep fraction");
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "cmbreak/chaos_core.hpp"
#include "cmbreak/keystream.hpp"
#include "support.hpp"

using namespace cmbreak;

namespace {

// 60-digit evaluations of the literal trigonometric forms (tests/oracles/map_oracle.py).
constexpr double kFGolden = 4.397148249264500087202835e-05;
constexpr double kGGolden = 1.94293406552794451926706e-04;
constexpr double kOrbitGolden[3] = {4.3971482492645e-05, 1.7613766641898465e-04, 7.09116925893409e-04};

const FMapParams kExemplarF1{2.10155, 3.569221};
const GMapParams kExemplarG{61.522, 257.26223};

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected cmbreak::Error");
    return ErrorCode::UsageError;
}

}  // namespace

TEST_SUITE("chaos_core") {

TEST_CASE("eval_f fixed cases") {
    CHECK(eval_f(0.0, {1.0, 1.0}) == 0.0);
    CHECK(eval_f(1.0, {1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eval_f(25.687, kExemplarF1) == doctest::Approx(kFGolden).epsilon(1e-12));
}

TEST_CASE("eval_f domain and parameters") {
    CHECK(code_of([] { (void)eval_f(-1e-300, {1.0, 1.0}); }) == ErrorCode::DomainError);
    CHECK(code_of([] { (void)eval_f(std::numeric_limits<double>::quiet_NaN(), {1.0, 1.0}); }) ==
          ErrorCode::DomainError);
    CHECK(code_of([] { FMapParams p(0.0, 1.0); }) == ErrorCode::DomainError);
    CHECK(code_of([] { FMapParams p(1.0, 0.0); }) == ErrorCode::DomainError);
    CHECK(code_of([] { GMapParams p(1.0, std::numeric_limits<double>::infinity()); }) == ErrorCode::DomainError);
}

TEST_CASE("eval_g fixed cases") {
    CHECK(eval_g(3.0, {1.0, 1.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(eval_g(79.82, kExemplarG) == doctest::Approx(kGGolden).epsilon(1e-12));
    CHECK(code_of([] { (void)eval_g(1.0, {1.0, 1.0}); }) == ErrorCode::NonFiniteState);
    CHECK(code_of([] { (void)eval_g(0.0, {1.0, 1.0}); }) == ErrorCode::DomainError);
    CHECK(code_of([] { (void)eval_g(-2.0, {1.0, 1.0}); }) == ErrorCode::DomainError);
}

TEST_CASE("g is singular at y = 1 for any alpha3") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> a(0.5, 300.0);
    for (int i = 0; i < 50; ++i) {
        const GMapParams p(a(rng), a(rng));
        CHECK(code_of([&] { (void)eval_g(1.0, p); }) == ErrorCode::NonFiniteState);
    }
}

TEST_CASE("property: f(0) = 0 and outputs are nonnegative") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> alpha(0.1, 50.0);
    std::uniform_real_distribution<double> sign(-1.0, 1.0);
    std::uniform_real_distribution<double> logx(-12.0, 4.0);
    for (int i = 0; i < 2000; ++i) {
        const double a1 = alpha(rng) * (sign(rng) < 0 ? -1 : 1);
        const FMapParams fp(a1, alpha(rng));
        const GMapParams gp(alpha(rng), alpha(rng));
        CHECK(eval_f(0.0, fp) == 0.0);
        const double x = std::pow(10.0, logx(rng));
        try {
            const double v = eval_f(x, fp);
            CHECK(v >= 0.0);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonFiniteState);
        }
        try {
            const double v = eval_g(x, gp);
            CHECK(v >= 0.0);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonFiniteState);
        }
    }
}

TEST_CASE("iterate_map") {
    SUBCASE("f from zero stays at zero") {
        const Orbit o = iterate_map(FMapParams{1.7, 2.3}, 0.0, 5);
        REQUIRE(o.size() == 5);
        for (double s : o.states()) CHECK(s == 0.0);
        CHECK(o.origin() == 0.0);
    }
    SUBCASE("f golden triple") {
        const Orbit o = iterate_map(kExemplarF1, 25.687, 3);
        REQUIRE(o.size() == 3);
        for (int i = 0; i < 3; ++i) CHECK(o[i] == doctest::Approx(kOrbitGolden[i]).epsilon(1e-12));
    }
    SUBCASE("logistic closed form") {
        const Orbit o = iterate_map(LogisticParams{4.0}, 0.5, 2);
        CHECK(o[0] == 1.0);
        CHECK(o[1] == 0.0);
    }
    SUBCASE("n = 0 is rejected") {
        CHECK(code_of([] { (void)iterate_map(LogisticParams{4.0}, 0.5, 0); }) == ErrorCode::DomainError);
    }
    SUBCASE("x0 outside the domain") {
        CHECK(code_of([] { (void)iterate_map(GMapParams{1.0, 1.0}, 0.0, 3); }) == ErrorCode::DomainError);
    }
    SUBCASE("failing iteration is reported") {
        try {
            (void)iterate_map(LogisticParams{1e200}, 0.5, 10);
            FAIL("expected NonFiniteState");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonFiniteState);
            CHECK(e.context().at("iteration") == "2");
        }
        try {
            (void)iterate_map(GMapParams{3.0, 2.0}, 1.0, 4);
            FAIL("expected NonFiniteState");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonFiniteState);
            CHECK(e.context().at("iteration") == "1");
        }
    }
}

TEST_CASE("quantize") {
    CHECK(quantize(0.5, 256) == 0);
    CHECK(quantize(1e-14, 256) == 1);
    CHECK(quantize(0.0, 7) == 0);
    CHECK(quantize(kOrbitGolden[0], 256) == 89);
    CHECK(quantize(kOrbitGolden[1], 256) == 241);
    CHECK(quantize(kOrbitGolden[2], 256) == 45);
    // Above 2^53 the product is already an integer; the remainder stays exact.
    CHECK(quantize(1000.0, 256) == static_cast<std::uint32_t>(std::fmod(1e17, 256.0)));
    CHECK(code_of([] { (void)quantize(std::numeric_limits<double>::infinity(), 256); }) ==
          ErrorCode::NonFiniteState);
    CHECK(code_of([] { (void)quantize(std::numeric_limits<double>::quiet_NaN(), 256); }) ==
          ErrorCode::NonFiniteState);
}

TEST_CASE("property: quantize range") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> logpsi(-16.0, 30.0);
    std::uniform_int_distribution<std::uint32_t> mod(2, 1u << 20);
    for (int i = 0; i < 100000; ++i) {
        const std::uint32_t m = mod(rng);
        const std::uint32_t q = quantize(std::pow(10.0, logpsi(rng)), m);
        REQUIRE(q < m);
    }
}

TEST_CASE("generate_keystreams") {
    const SecretKey key = SecretKey::exemplar_key();

    SUBCASE("1x1") {
        const KeystreamSet ks = generate_keystreams(key, 1, 1);
        CHECK(ks.phi1 == std::vector<std::uint32_t>{0});
        CHECK(ks.phi2 == std::vector<std::uint32_t>{0});
        CHECK(ks.phi3.size() == 1);
        CHECK(ks.phi4.size() == 1);
    }

    SUBCASE("exemplar key 512x512 prefixes") {
        // Recorded from the first run; each step cross-checked at 60 digits.
        const std::vector<std::uint32_t> phi1 = {89, 497, 301, 193, 104, 55, 27, 119, 489, 72, 458, 506, 276, 145, 56, 281};
        const std::vector<std::uint32_t> phi2 = {436, 207, 184, 334, 27, 259, 97, 279, 414, 410, 157, 511, 217, 95, 506, 137};
        const Bytes phi3 = {239, 200, 29, 195, 17, 199, 198, 6, 47, 1, 195, 144, 44, 92, 188, 73};
        const Bytes phi4 = {171, 144, 111, 202, 197, 248, 240, 245, 117, 172, 185, 233, 75, 222, 105, 223};
        const KeystreamSet ks = generate_keystreams(key, 512, 512);
        REQUIRE(ks.phi1.size() == 512 * 512);
        REQUIRE(ks.phi2.size() == 512 * 512);
        REQUIRE(ks.phi3.size() == 512 * 512);
        REQUIRE(ks.phi4.size() == 512 * 512);
        CHECK(std::vector<std::uint32_t>(ks.phi1.begin(), ks.phi1.begin() + 16) == phi1);
        CHECK(std::vector<std::uint32_t>(ks.phi2.begin(), ks.phi2.begin() + 16) == phi2);
        CHECK(Bytes(ks.phi3.begin(), ks.phi3.begin() + 16) == phi3);
        CHECK(Bytes(ks.phi4.begin(), ks.phi4.begin() + 16) == phi4);
        for (auto v : ks.phi1) REQUIRE(v < 512);
        for (auto v : ks.phi2) REQUIRE(v < 512);
    }

    SUBCASE("rectangular ranges") {
        const KeystreamSet ks = generate_keystreams(key, 3, 7);
        for (auto v : ks.phi1) CHECK(v < 3);
        for (auto v : ks.phi2) CHECK(v < 7);
    }

    SUBCASE("deterministic") {
        CHECK(generate_keystreams(key, 40, 30) == generate_keystreams(key, 40, 30));
    }

    SUBCASE("singular y0 is rejected") {
        SecretKey bad = key;
        bad.g.y0 = 1.0;
        try {
            (void)generate_keystreams(bad, 8, 8);
            FAIL("expected KeyRejected");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::KeyRejected);
            CHECK(e.context().at("orbit") == "g");
            CHECK(e.context().at("iteration") == "1");
        }
    }

    SUBCASE("zero dimension") {
        CHECK(code_of([&] { (void)generate_keystreams(key, 0, 4); }) == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("lyapunov_exponent") {
    SUBCASE("logistic r = 4 calibrates to ln 2") {
        const double l = lyapunov_exponent(LogisticParams{4.0}, 0.3, {1000, 100000});
        CHECK(std::abs(l - std::numbers::ln2) < 0.05);
    }
    SUBCASE("logistic r = 2 is non-positive or escapes") {
        try {
            CHECK(lyapunov_exponent(LogisticParams{2.0}, 0.3) <= 0.0);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::OrbitEscaped);
        }
    }
    SUBCASE("f with the exemplar parameters, regression golden") {
        const double l = lyapunov_exponent(kExemplarF1, 25.687);
        CHECK(l == doctest::Approx(2.005020150304).epsilon(1e-9));
        CHECK(l > 0.0);
    }
    SUBCASE("sample count floor") {
        CHECK(code_of([] { (void)lyapunov_exponent(LogisticParams{4.0}, 0.3, {10, 99}); }) == ErrorCode::DomainError);
    }
    SUBCASE("escaping orbit") {
        CHECK(code_of([] { (void)lyapunov_exponent(LogisticParams{10.0}, 0.3); }) == ErrorCode::OrbitEscaped);
    }
}

TEST_CASE("finite difference derivative") {
    CHECK(finite_difference_derivative(LogisticParams{4.0}, 0.25) == doctest::Approx(2.0).epsilon(1e-8));
    // At the domain edge the step narrows instead of probing x < 0.
    CHECK(std::isfinite(finite_difference_derivative(FMapParams{1.0, 1.0}, 0.0)));
    CHECK(std::isfinite(finite_difference_derivative(FMapParams{1.0, 1.0}, 1e-9)));
}

TEST_CASE("lyapunov_sweep") {
    SUBCASE("single logistic cell") {
        const SweepResult r = lyapunov_sweep(MapKind::logistic, {4.0, 4.0, 1}, {0.0, 0.0, 1}, 0.3);
        REQUIRE(r.cells.size() == 1);
        CHECK(r.cells[0].positive());
        CHECK(r.fraction_positive() == 1.0);
    }
    SUBCASE("every cell escapes") {
        const SweepResult r = lyapunov_sweep(MapKind::logistic, {10.0, 20.0, 4}, {0.0, 0.0, 1}, 0.3);
        CHECK(r.cells.size() == 4);
        CHECK(r.escaped_count == 4);
        CHECK(r.fraction_positive() == 0.0);
        for (const auto& c : r.cells) CHECK(c.escaped());
    }
    SUBCASE("small f grid is mixed and row-major") {
        const SweepResult r = lyapunov_sweep(MapKind::f, {1.0, 4.0, 6}, {1.0, 5.0, 6}, 25.687, {500, 1000});
        REQUIRE(r.cells.size() == 36);
        CHECK(r.cells[0].p1 == 1.0);
        CHECK(r.cells[0].p2 == 1.0);
        CHECK(r.cells[1].p1 == 1.0);
        CHECK(r.cells[1].p2 == doctest::Approx(1.8));
        CHECK(r.cells[35].p1 == 4.0);
        CHECK(r.cells[35].p2 == 5.0);
        std::size_t positive = 0;
        for (const auto& c : r.cells) positive += c.positive();
        CHECK(positive == r.positive_count);
    }
    SUBCASE("axis endpoints") {
        const SweepAxis a{1.0, 4.0, 50};
        CHECK(a.at(0) == 1.0);
        CHECK(a.at(49) == 4.0);
        CHECK(SweepAxis{2.5, 9.0, 1}.at(0) == 2.5);
    }
}

TEST_CASE("map_graph") {
    SUBCASE("f endpoints") {
        const auto pts = map_graph(FMapParams{1.0, 1.0}, 0.0, 1.0, 2);
        REQUIRE(pts.size() == 2);
        CHECK(pts[0].x == 0.0);
        CHECK(pts[0].value == 0.0);
        CHECK(pts[1].x == 1.0);
        CHECK(pts[1].value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_FALSE(pts[0].escaped);
    }
    SUBCASE("g singular sample is flagged") {
        const auto pts = map_graph(GMapParams{1.0, 1.0}, 0.5, 1.5, 3);
        REQUIRE(pts.size() == 3);
        CHECK(pts[1].x == 1.0);
        CHECK(pts[1].escaped);
        CHECK(std::isnan(pts[1].value));
        CHECK_FALSE(pts[0].escaped);
        CHECK_FALSE(pts[2].escaped);
    }
    SUBCASE("exemplar parameters over [0, 100]") {
        const auto pts = map_graph(kExemplarF1, 0.0, 100.0, 1001);
        CHECK(pts.size() == 1001);
        for (const auto& p : pts) {
            if (!p.escaped) CHECK(p.value >= 0.0);
        }
    }
    SUBCASE("bad ranges") {
        CHECK(code_of([] { (void)map_graph(FMapParams{1.0, 1.0}, 1.0, 1.0, 5); }) == ErrorCode::DomainError);
        CHECK(code_of([] { (void)map_graph(FMapParams{1.0, 1.0}, 0.0, 1.0, 1); }) == ErrorCode::DomainError);
    }
}

TEST_CASE("collapse diagnostic, regression golden") {
    CHECK(collapse_fraction(kExemplarG, 1) == doctest::Approx(1.0));
    const double a = collapse_fraction(GMapParams{2.0, 1.0}, 3, {20, 200, 1e-6, 1000.0});
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
}

TEST_CASE("make_map") {
    CHECK(kind_of(make_map(MapKind::f, 2.0, 3.0)) == MapKind::f);
    CHECK(std::get<GMapParams>(make_map(MapKind::g, 2.0, 3.0)) == GMapParams{2.0, 3.0});
    CHECK(std::get<LogisticParams>(make_map(MapKind::logistic, 3.5, 0.0)).r == 3.5);
    CHECK(in_domain(FMapParams{1.0, 1.0}, 0.0));
    CHECK_FALSE(in_domain(GMapParams{1.0, 1.0}, 0.0));
}

}  // TEST_SUITE

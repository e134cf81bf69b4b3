#pragma once

// The two composition maps of the cipher, orbit generation, keystream
// quantization and the dynamical diagnostics (Lyapunov exponent, sweeps and
// map graphs). The logistic map is only here as a calibration target for the
// Lyapunov estimator.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace cmbreak {

/// f(x) = tan^2(5 atan(tan(3 atan(sqrt x)) / alpha1)) / alpha2^2, domain x >= 0.
struct FMapParams {
    double alpha1;
    double alpha2;

    FMapParams(double a1, double a2);

    friend bool operator==(const FMapParams&, const FMapParams&) = default;
};

/// g(y) = cot^2(8 atan(alpha3 tan(4 atan(1 / sqrt y)))) / alpha4^2, domain y > 0.
struct GMapParams {
    double alpha3;
    double alpha4;

    GMapParams(double a3, double a4);

    friend bool operator==(const GMapParams&, const GMapParams&) = default;
};

/// x -> r x (1 - x)
struct LogisticParams {
    double r;

    friend bool operator==(const LogisticParams&, const LogisticParams&) = default;
};

enum class MapKind : std::uint8_t { f, g, logistic };

using MapSpec = std::variant<FMapParams, GMapParams, LogisticParams>;

MapKind kind_of(const MapSpec& map) noexcept;

/// Builds a map from its kind and up to two parameters. The logistic map
/// takes r from `p1` and ignores `p2`.
MapSpec make_map(MapKind kind, double p1, double p2);

double eval_f(double x, const FMapParams& p);
double eval_g(double y, const GMapParams& p);
double eval_logistic(double x, const LogisticParams& p);
double eval_map(const MapSpec& map, double x);

bool in_domain(const MapSpec& map, double x) noexcept;

/// Finite, in-domain states psi(1..n) of one map started at `origin`.
class Orbit {
public:
    double origin() const noexcept { return origin_; }
    std::span<const double> states() const noexcept { return states_; }
    std::size_t size() const noexcept { return states_.size(); }
    double operator[](std::size_t i) const { return states_[i]; }

private:
    friend Orbit iterate_map(const MapSpec& map, double x0, std::size_t n);
    Orbit(double origin, std::vector<double> states)
        : origin_(origin), states_(std::move(states)) {}

    double origin_;
    std::vector<double> states_;
};

/// state(1) = map(x0), state(k) = map(state(k-1)). Throws NonFiniteState
/// carrying the 1-based failing iteration in context["iteration"].
Orbit iterate_map(const MapSpec& map, double x0, std::size_t n);

/// floor(psi * 1e14) mod modulus. The product is the rounded double product;
/// floor and remainder are exact on it.
std::uint32_t quantize(double psi, std::uint32_t modulus);

// ---------------------------------------------------------------------------
// Diagnostics

struct LyapunovOptions {
    std::size_t transient = 1000;
    std::size_t samples = 5000;
};

/// Mean of ln|map'(x_k)| over post-transient iterates. The derivative is a
/// central difference with step max(|x|, 1) * 2^-20, narrowed to x/2 when the
/// lower probe would leave the domain (forward difference at x == 0).
/// Throws OrbitEscaped when an iterate is non-finite or map' evaluates to 0.
double lyapunov_exponent(const MapSpec& map, double x0, const LyapunovOptions& opts = {});

double finite_difference_derivative(const MapSpec& map, double x);

struct SweepAxis {
    double lo;
    double hi;
    std::size_t steps;

    double at(std::size_t i) const noexcept;
};

struct SweepCell {
    double p1;
    double p2;
    std::optional<double> lambda;  // empty when the orbit escaped

    bool escaped() const noexcept { return !lambda.has_value(); }
    bool positive() const noexcept { return lambda && *lambda > 0.0; }
};

struct SweepResult {
    MapKind kind;
    std::vector<SweepCell> cells;  // row-major: p1 outer, p2 inner
    std::size_t positive_count = 0;
    std::size_t escaped_count = 0;

    double fraction_positive() const noexcept;
};

/// One cell per (p1, p2) grid point. Cell failures are recorded in-band.
/// For the logistic map only `p1_axis` matters; pass a one-step `p2_axis`.
SweepResult lyapunov_sweep(MapKind kind, const SweepAxis& p1_axis, const SweepAxis& p2_axis,
                           double x0, const LyapunovOptions& opts = {});

struct GraphPoint {
    double x;
    double value;  // NaN when escaped
    bool escaped;
};

std::vector<GraphPoint> map_graph(const MapSpec& map, double lo, double hi, std::size_t samples);

struct CollapseOptions {
    std::size_t trials = 100;
    std::size_t iterations = 1000;
    double threshold = 1e-6;
    double y0_max = 1000.0;
};

/// Fraction of random y0 in (0, y0_max] whose g-orbit enters [0, threshold)
/// within `iterations` steps. Orbits that hit a singularity count as not
/// collapsed.
double collapse_fraction(const GMapParams& params, std::uint64_t seed, const CollapseOptions& opts = {});

}  // namespace cmbreak

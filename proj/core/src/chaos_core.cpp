#include "cmbreak/chaos_core.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "cmbreak/errors.hpp"
#include "parallel.hpp"

namespace cmbreak {

namespace {

constexpr double kQuantScale = 1e14;

void require_divisor(double v, const char* name) {
    if (!std::isfinite(v) || v == 0.0) {
        throw Error(ErrorCode::DomainError, std::string(name) + " must be finite and nonzero",
                    {{"parameter", name}});
    }
}

[[noreturn]] void non_finite(const char* map, double input) {
    throw Error(ErrorCode::NonFiniteState, std::string(map) + " has no finite value at this input",
                {{"map", map}, {"input", std::to_string(input)}});
}

// tan(3 atan(s)) with s = sqrt(x), as the rational function s (3 - x) / (1 - 3x).
// The x > 1 branch divides through by x so the numerator cannot overflow.
double triple_angle_tan_of_sqrt(double x) {
    const double s = std::sqrt(x);
    if (x <= 1.0) return s * (3.0 - x) / std::fma(-3.0, x, 1.0);
    const double inv = 1.0 / x;
    return s * ((3.0 * inv - 1.0) / (inv - 3.0));
}

// tan(4 atan(1 / sqrt(y))). With t = 1/sqrt(y): 4t(1 - t^2) / (1 - 6t^2 + t^4),
// which is exactly zero at y = 1. For y < 1 the same expression is rewritten in
// y so no intermediate overflows.
double quadruple_angle_tan_of_rsqrt(double y) {
    if (y >= 1.0) {
        const double t = 1.0 / std::sqrt(y);
        const double t2 = 1.0 / y;
        return 4.0 * t * (1.0 - t2) / (1.0 - 6.0 * t2 + t2 * t2);
    }
    return 4.0 * std::sqrt(y) * (y - 1.0) / (y * y - 6.0 * y + 1.0);
}

}  // namespace

FMapParams::FMapParams(double a1, double a2) : alpha1(a1), alpha2(a2) {
    require_divisor(a1, "alpha1");
    require_divisor(a2, "alpha2");
}

GMapParams::GMapParams(double a3, double a4) : alpha3(a3), alpha4(a4) {
    require_divisor(a3, "alpha3");
    require_divisor(a4, "alpha4");
}

MapKind kind_of(const MapSpec& map) noexcept {
    return static_cast<MapKind>(map.index());
}

MapSpec make_map(MapKind kind, double p1, double p2) {
    switch (kind) {
        case MapKind::f: return FMapParams{p1, p2};
        case MapKind::g: return GMapParams{p1, p2};
        case MapKind::logistic: return LogisticParams{p1};
    }
    throw Error(ErrorCode::DomainError, "unknown map kind");
}

double eval_f(double x, const FMapParams& p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw Error(ErrorCode::DomainError, "f is defined for finite x >= 0",
                    {{"input", std::to_string(x)}});
    }
    const double inner = triple_angle_tan_of_sqrt(x) / p.alpha1;
    const double t = std::tan(5.0 * std::atan(inner));
    const double out = t * t / (p.alpha2 * p.alpha2);
    if (!std::isfinite(out)) non_finite("f", x);
    return out;
}

double eval_g(double y, const GMapParams& p) {
    if (!(y > 0.0) || !std::isfinite(y)) {
        throw Error(ErrorCode::DomainError, "g is defined for finite y > 0",
                    {{"input", std::to_string(y)}});
    }
    const double inner = p.alpha3 * quadruple_angle_tan_of_rsqrt(y);
    const double t = std::tan(8.0 * std::atan(inner));
    if (t == 0.0 || !std::isfinite(t)) non_finite("g", y);
    const double cot = 1.0 / t;
    const double out = cot * cot / (p.alpha4 * p.alpha4);
    if (!std::isfinite(out)) non_finite("g", y);
    return out;
}

double eval_logistic(double x, const LogisticParams& p) {
    const double out = p.r * x * (1.0 - x);
    if (!std::isfinite(out)) non_finite("logistic", x);
    return out;
}

double eval_map(const MapSpec& map, double x) {
    switch (kind_of(map)) {
        case MapKind::f: return eval_f(x, std::get<FMapParams>(map));
        case MapKind::g: return eval_g(x, std::get<GMapParams>(map));
        case MapKind::logistic: return eval_logistic(x, std::get<LogisticParams>(map));
    }
    return std::numeric_limits<double>::quiet_NaN();
}

bool in_domain(const MapSpec& map, double x) noexcept {
    if (!std::isfinite(x)) return false;
    switch (kind_of(map)) {
        case MapKind::f: return x >= 0.0;
        case MapKind::g: return x > 0.0;
        case MapKind::logistic: return true;
    }
    return false;
}

Orbit iterate_map(const MapSpec& map, double x0, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::DomainError, "orbit length must be at least 1");
    if (!in_domain(map, x0)) {
        throw Error(ErrorCode::DomainError, "initial condition outside the map's domain",
                    {{"x0", std::to_string(x0)}});
    }
    std::vector<double> states;
    states.reserve(n);
    double x = x0;
    for (std::size_t k = 1; k <= n; ++k) {
        try {
            x = eval_map(map, x);
        } catch (const Error& e) {
            throw Error(ErrorCode::NonFiniteState,
                        "orbit left the domain at iteration " + std::to_string(k) + ": " + e.what(),
                        {{"iteration", std::to_string(k)}, {"cause", std::string(to_string(e.code()))}});
        }
        if (!in_domain(map, x)) {
            throw Error(ErrorCode::NonFiniteState,
                        "orbit left the domain at iteration " + std::to_string(k),
                        {{"iteration", std::to_string(k)}});
        }
        states.push_back(x);
    }
    return Orbit(x0, std::move(states));
}

std::uint32_t quantize(double psi, std::uint32_t modulus) {
    if (modulus == 0) throw Error(ErrorCode::DomainError, "modulus must be positive");
    if (!std::isfinite(psi)) {
        throw Error(ErrorCode::NonFiniteState, "cannot quantize a non-finite state");
    }
    if (psi < 0.0) {
        throw Error(ErrorCode::DomainError, "cannot quantize a negative state",
                    {{"psi", std::to_string(psi)}});
    }
    const double scaled = psi * kQuantScale;
    if (!std::isfinite(scaled)) {
        throw Error(ErrorCode::NonFiniteState, "scaled state overflows",
                    {{"psi", std::to_string(psi)}});
    }
    // fmod is exact for integer-valued doubles
    return static_cast<std::uint32_t>(std::fmod(std::floor(scaled), static_cast<double>(modulus)));
}

// ---------------------------------------------------------------------------

double finite_difference_derivative(const MapSpec& map, double x) {
    double h = std::max(std::abs(x), 1.0) * 0x1p-20;
    if (!in_domain(map, x - h)) {
        if (x > 0.0) {
            h = x / 2.0;
        } else {
            return (eval_map(map, x + h) - eval_map(map, x)) / h;
        }
    }
    return (eval_map(map, x + h) - eval_map(map, x - h)) / (2.0 * h);
}

double lyapunov_exponent(const MapSpec& map, double x0, const LyapunovOptions& opts) {
    if (opts.samples < 100) {
        throw Error(ErrorCode::DomainError, "Lyapunov estimate needs at least 100 samples");
    }
    auto escaped = [](std::size_t step, const std::string& why) {
        return Error(ErrorCode::OrbitEscaped, "orbit escaped at step " + std::to_string(step) + ": " + why,
                     {{"step", std::to_string(step)}});
    };
    if (!in_domain(map, x0)) throw escaped(0, "initial condition outside domain");

    double x = x0;
    std::size_t step = 0;
    try {
        for (; step < opts.transient; ++step) {
            x = eval_map(map, x);
            if (!in_domain(map, x)) throw escaped(step + 1, "left domain");
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < opts.samples; ++i, ++step) {
            const double d = finite_difference_derivative(map, x);
            if (!std::isfinite(d) || d == 0.0) throw escaped(step, "derivative is zero or non-finite");
            sum += std::log(std::abs(d));
            x = eval_map(map, x);
            if (!in_domain(map, x)) throw escaped(step + 1, "left domain");
        }
        return sum / static_cast<double>(opts.samples);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::OrbitEscaped) throw;
        throw escaped(step, e.what());
    }
}

double SweepAxis::at(std::size_t i) const noexcept {
    if (steps <= 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

double SweepResult::fraction_positive() const noexcept {
    if (cells.empty()) return 0.0;
    return static_cast<double>(positive_count) / static_cast<double>(cells.size());
}

SweepResult lyapunov_sweep(MapKind kind, const SweepAxis& p1_axis, const SweepAxis& p2_axis,
                           double x0, const LyapunovOptions& opts) {
    if (p1_axis.steps == 0 || p2_axis.steps == 0) {
        throw Error(ErrorCode::DomainError, "sweep grid must be non-empty");
    }
    SweepResult result{kind, {}};
    result.cells.resize(p1_axis.steps * p2_axis.steps);
    detail::parallel_for(result.cells.size(), [&](std::size_t idx) {
        SweepCell& cell = result.cells[idx];
        cell.p1 = p1_axis.at(idx / p2_axis.steps);
        cell.p2 = p2_axis.at(idx % p2_axis.steps);
        try {
            cell.lambda = lyapunov_exponent(make_map(kind, cell.p1, cell.p2), x0, opts);
        } catch (const Error&) {
            cell.lambda.reset();
        }
    });
    for (const auto& c : result.cells) {
        if (c.positive()) ++result.positive_count;
        if (c.escaped()) ++result.escaped_count;
    }
    return result;
}

std::vector<GraphPoint> map_graph(const MapSpec& map, double lo, double hi, std::size_t samples) {
    if (!(lo < hi) || samples < 2) {
        throw Error(ErrorCode::DomainError, "graph needs lo < hi and at least two samples");
    }
    const SweepAxis axis{lo, hi, samples};
    std::vector<GraphPoint> out;
    out.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = axis.at(i);
        try {
            out.push_back({x, eval_map(map, x), false});
        } catch (const Error&) {
            out.push_back({x, std::numeric_limits<double>::quiet_NaN(), true});
        }
    }
    return out;
}

double collapse_fraction(const GMapParams& params, std::uint64_t seed, const CollapseOptions& opts) {
    std::mt19937_64 rng(seed);
    // (0, y0_max]: draw from [0, y0_max) and reflect
    std::uniform_real_distribution<double> dist(0.0, opts.y0_max);
    std::size_t collapsed = 0;
    for (std::size_t trial = 0; trial < opts.trials; ++trial) {
        double y = opts.y0_max - dist(rng);
        try {
            for (std::size_t k = 0; k < opts.iterations; ++k) {
                y = eval_g(y, params);
                if (y < opts.threshold) {
                    ++collapsed;
                    break;
                }
            }
        } catch (const Error&) {
        }
    }
    return opts.trials == 0 ? 0.0 : static_cast<double>(collapsed) / static_cast<double>(opts.trials);
}

}  // namespace cmbreak

#include "consensus/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "consensus/errors.hpp"

namespace consensus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSpecialRejectTol = 1e-8;
constexpr double kUnitMagnitudeTol = 1e-8;
constexpr double kEigenvalueDedupTol = 1e-10;

void require_valid(const ProtocolParams& params) {
    if (!(params.k1 > 0.0) || !(params.k2 > 0.0))
        throw ArgumentError("control gains must be positive");
}

void require_disagreement(double lambda, ProtocolKind kind) {
    if (std::abs(lambda - special_eigenvalue(kind)) < kSpecialRejectTol)
        throw ArgumentError(
            "the consensus eigenvalue generates the group-decision factor, not a "
            "disagreement factor");
}

// Unit complex the delay term must equal for a root at s = i*omega.
std::complex<double> phase_ratio(double lambda, const ProtocolParams& params, double omega) {
    const std::complex<double> informer(params.k1, params.k2 * omega);
    if (params.kind == ProtocolKind::NoSelfDelay)
        return std::complex<double>(params.k1 - omega * omega, params.k2 * omega) /
               (lambda * informer);
    return omega * omega / (lambda * informer);
}

}  // namespace

std::complex<double> factor_char_value(std::complex<double> s, double lambda,
                                       const ProtocolParams& params, double tau) {
    require_valid(params);
    const std::complex<double> informer = params.k2 * s + params.k1;
    const std::complex<double> delay = std::exp(-tau * s);
    if (params.kind == ProtocolKind::NoSelfDelay)
        return s * s + informer * (1.0 - lambda * delay);
    return s * s + lambda * informer * delay;
}

std::vector<double> crossing_frequencies(double lambda, const ProtocolParams& params) {
    require_valid(params);
    require_disagreement(lambda, params.kind);

    const double k1 = params.k1;
    const double k2 = params.k2;
    std::vector<double> result;

    if (params.kind == ProtocolKind::SelfDelay) {
        // omega^4 - (k2 lambda)^2 omega^2 - (k1 lambda)^2 = 0 has exactly one
        // positive root in omega^2.
        const double a = k2 * k2 * lambda * lambda;
        const double b = k1 * k1 * lambda * lambda;
        const double w2 = 0.5 * (a + std::sqrt(a * a + 4.0 * b));
        result.push_back(std::sqrt(w2));
        return result;
    }

    // omega^4 + (mu k2^2 - 2 k1) omega^2 + mu k1^2 = 0 with mu = 1 - lambda^2
    // yields zero, one or two positive roots.
    const double mu = 1.0 - lambda * lambda;
    const double gamma = (mu * k2 * k2 - 2.0 * k1) * (mu * k2 * k2 - 2.0 * k1) -
                         4.0 * k1 * k1 * mu;
    if (gamma < 0.0) return result;
    const double sqrt_gamma = std::sqrt(gamma);
    const double base = k1 - 0.5 * mu * k2 * k2;
    for (double w2 : {base - 0.5 * sqrt_gamma, base + 0.5 * sqrt_gamma})
        if (w2 > 0.0) result.push_back(std::sqrt(w2));
    std::sort(result.begin(), result.end());
    if (result.size() == 2 && result[0] == result[1]) result.pop_back();
    return result;
}

double crossing_delay(double lambda, const ProtocolParams& params, double omega) {
    require_valid(params);
    require_disagreement(lambda, params.kind);

    const std::complex<double> ratio = phase_ratio(lambda, params, omega);
    if (std::abs(std::abs(ratio) - 1.0) > kUnitMagnitudeTol)
        throw ConsistencyError("frequency does not satisfy the magnitude condition");

    double lifted = -std::arg(ratio);
    if (lifted <= 0.0) lifted += 2.0 * std::numbers::pi;
    return lifted / omega;
}

FactorCrossing factor_margin(double lambda, const ProtocolParams& params) {
    FactorCrossing crossing;
    crossing.lambda = lambda;
    crossing.omega = kInf;
    crossing.tau = kInf;
    crossing.finite = false;
    for (double omega : crossing_frequencies(lambda, params)) {
        const double tau = crossing_delay(lambda, params, omega);
        if (tau < crossing.tau) {
            crossing.omega = omega;
            crossing.tau = tau;
            crossing.finite = true;
        }
    }
    return crossing;
}

DelayMargin topology_margin(const Spectrum& spec, const ProtocolParams& params) {
    if (spec.kind != params.kind)
        throw ArgumentError("spectrum and parameters disagree on the protocol kind");
    require_valid(params);

    DelayMargin margin;
    margin.margin = kInf;
    margin.exigent_lambda = std::numeric_limits<double>::quiet_NaN();

    const int n = int(spec.eigenvalues.size());
    margin.per_factor.reserve(n - 1);
    for (int i = 1; i < n; ++i) {
        const double lambda = spec.eigenvalues(i);
        // Equal eigenvalues generate identical factors; reuse the result.
        const auto previous =
            std::find_if(margin.per_factor.begin(), margin.per_factor.end(),
                         [lambda](const FactorCrossing& c) {
                             return std::abs(c.lambda - lambda) <= kEigenvalueDedupTol;
                         });
        FactorCrossing crossing;
        if (previous != margin.per_factor.end()) {
            crossing = *previous;
            crossing.lambda = lambda;
        } else {
            crossing = factor_margin(lambda, params);
        }
        if (crossing.finite && crossing.tau < margin.margin) {
            margin.margin = crossing.tau;
            margin.exigent_lambda = crossing.lambda;
        }
        margin.per_factor.push_back(crossing);
    }
    return margin;
}

FactorCrossing absolute_margin(const ProtocolParams& params,
                               std::optional<int> agent_count) {
    return factor_margin(absolute_exigent_eigenvalue(params.kind, agent_count), params);
}

BoundarySurface boundary_surface(ProtocolKind kind, std::pair<double, double> k1_range,
                                 std::pair<double, double> k2_range,
                                 std::pair<int, int> grid_counts,
                                 std::optional<int> agent_count) {
    const auto axis = [](std::pair<double, double> range, int count, const char* name) {
        if (!(range.first > 0.0) || range.second < range.first)
            throw ArgumentError(std::string(name) + " range must be positive with hi >= lo");
        if (count < 1) throw ArgumentError(std::string(name) + " grid count must be >= 1");
        Eigen::VectorXd values(count);
        for (int i = 0; i < count; ++i)
            values(i) = count == 1 ? range.first
                                   : range.first + (range.second - range.first) * i /
                                                       double(count - 1);
        return values;
    };

    BoundarySurface surface;
    surface.k1_values = axis(k1_range, grid_counts.first, "k1");
    surface.k2_values = axis(k2_range, grid_counts.second, "k2");
    surface.tau.resize(surface.k1_values.size(), surface.k2_values.size());

    const double lambda = absolute_exigent_eigenvalue(kind, agent_count);
    for (int i = 0; i < surface.k1_values.size(); ++i) {
        for (int j = 0; j < surface.k2_values.size(); ++j) {
            const ProtocolParams params{kind, surface.k1_values(i), surface.k2_values(j)};
            surface.tau(i, j) = factor_margin(lambda, params).tau;
        }
    }
    return surface;
}

namespace {

// Residual of the magnitude condition at s = i*omega; a crossing frequency
// is a zero of this function.
double magnitude_residual(double lambda, const ProtocolParams& params, double omega) {
    const double k1 = params.k1;
    const double k2 = params.k2;
    const double informer_sq = k1 * k1 + k2 * k2 * omega * omega;
    if (params.kind == ProtocolKind::SelfDelay)
        return omega * omega * omega * omega - lambda * lambda * informer_sq;
    const double re = k1 - omega * omega;
    return re * re + k2 * k2 * omega * omega - lambda * lambda * informer_sq;
}

double bisect_root(double lambda, const ProtocolParams& params, double lo, double hi) {
    double f_lo = magnitude_residual(lambda, params, lo);
    while (hi - lo > 1e-12 * std::max(1.0, lo)) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = magnitude_residual(lambda, params, mid);
        if ((f_lo <= 0.0) == (f_mid <= 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Smallest positive delay placing a root at i*omega, recomputed from the
// factor itself rather than the closed-form ratio.
double oracle_phase_delay(double lambda, const ProtocolParams& params, double omega) {
    const std::complex<double> s(0.0, omega);
    const std::complex<double> informer = params.k2 * s + params.k1;
    std::complex<double> required;
    if (params.kind == ProtocolKind::NoSelfDelay)
        required = (s * s + informer) / (lambda * informer);
    else
        required = -(s * s) / (lambda * informer);
    double lifted = -std::arg(required);
    if (lifted <= 0.0) lifted += 2.0 * std::numbers::pi;
    return lifted / omega;
}

}  // namespace

double oracle_margin(double lambda, const ProtocolParams& params) {
    require_valid(params);
    require_disagreement(lambda, params.kind);

    const double omega_lo = 1e-4;
    const double omega_hi = 10.0 * (1.0 + std::abs(lambda)) * (params.k1 + params.k2 + 1.0);
    const int cells = 4096;
    const double log_lo = std::log(omega_lo);
    const double log_step = (std::log(omega_hi) - log_lo) / cells;

    std::vector<double> grid(cells + 1), residual(cells + 1);
    for (int i = 0; i <= cells; ++i) {
        grid[i] = std::exp(log_lo + i * log_step);
        residual[i] = magnitude_residual(lambda, params, grid[i]);
    }

    std::vector<double> roots;
    for (int i = 0; i < cells; ++i) {
        if (residual[i] == 0.0) {
            roots.push_back(grid[i]);
        } else if ((residual[i] < 0.0) != (residual[i + 1] < 0.0)) {
            roots.push_back(bisect_root(lambda, params, grid[i], grid[i + 1]));
        }
    }

    // A root pair falling inside a single cell leaves no sign change on the
    // grid; hunt for interior dips at local extrema of the sampled residual.
    for (int i = 1; i < cells; ++i) {
        const bool min_above =
            residual[i] > 0.0 && residual[i] <= residual[i - 1] && residual[i] <= residual[i + 1];
        const bool max_below =
            residual[i] < 0.0 && residual[i] >= residual[i - 1] && residual[i] >= residual[i + 1];
        if (!min_above && !max_below) continue;
        const double sign = min_above ? 1.0 : -1.0;
        double a = grid[i - 1], b = grid[i + 1];
        for (int iter = 0; iter < 200 && (b - a) > 1e-14 * std::max(1.0, a); ++iter) {
            const double m1 = a + (b - a) / 3.0;
            const double m2 = b - (b - a) / 3.0;
            if (sign * magnitude_residual(lambda, params, m1) <
                sign * magnitude_residual(lambda, params, m2))
                b = m2;
            else
                a = m1;
        }
        const double dip = 0.5 * (a + b);
        if (sign * magnitude_residual(lambda, params, dip) < 0.0) {
            roots.push_back(bisect_root(lambda, params, grid[i - 1], dip));
            roots.push_back(bisect_root(lambda, params, dip, grid[i + 1]));
        }
    }

    double margin = kInf;
    for (double omega : roots)
        margin = std::min(margin, oracle_phase_delay(lambda, params, omega));
    return margin;
}

double sylvester_resultant_det(double lambda1, double lambda2,
                               const ProtocolParams& params) {
    require_valid(params);
    // Entries reach (k lambda)^2 while the determinant cancels down to
    // k2^4 (l1^2 - l2^2)^2; extended precision keeps the cancellation well
    // below the 1e-10 the identity is held to.
    const long double a1 = (long double)(params.k1) * params.k1 * lambda1 * lambda1;
    const long double b1 = (long double)(params.k2) * params.k2 * lambda1 * lambda1;
    const long double a2 = (long double)(params.k1) * params.k1 * lambda2 * lambda2;
    const long double b2 = (long double)(params.k2) * params.k2 * lambda2 * lambda2;

    Eigen::Matrix<long double, 4, 4> r;
    r << 1.0L, -a1, -b1, 0.0L,
         0.0L, 1.0L, -a1, -b1,
         1.0L, -a2, -b2, 0.0L,
         0.0L, 1.0L, -a2, -b2;
    return double(r.determinant());
}

}  // namespace consensus

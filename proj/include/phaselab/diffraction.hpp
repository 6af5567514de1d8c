#pragma once

/*
 * diffraction.hpp — one-dimensional layer-disorder model.
 *
 * n scatterers sit at Z_0 = 0 < Z_1 < ... < Z_{n-1}, the n-1 spacings drawn
 * i.i.d. from a finite set {d_j} with probabilities {p_j}.  The expected
 * intensity of the summed unit phasors is
 *
 *     I(q) = n + 2 Re I_0(q),   I_0(q) = sum_{r=1}^{n-1} (n-r) C(q)^r,
 *     C(q) = sum_j p_j e^{i q d_j}.
 *
 * The ramped geometric sum has the closed form
 *
 *     I_0 = n z (1 - z^{n-1})/(1 - z) - z (1 - n z^{n-1} + (n-1) z^n)/(1-z)^2
 *
 * which divides by (1-z)^2 and is catastrophically cancellative near z = 1;
 * within |1 - C| <= 1e-6 of full coherence we sum the O(n) ramp directly.
 * At exact coherence I(q) = n^2: the Bragg peaks, where intensity scales
 * quadratically instead of linearly.
 *
 * Phases q*d are reduced mod 2 pi through an exact product split, so a wave
 * number that is exactly commensurate with every distance produces C = 1
 * exactly and I = n^2 to the last bit.
 */

#include "phaselab/coherence.hpp"
#include "phaselab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace phaselab {

// |1 - C(q)| below this switches the exact sum to its direct O(n) form and
// marks the wave number near-coherent.
inline constexpr double kNearCoherenceDelta = 1e-6;

// Layer medium: distances d_0..d_{M-1} with selection probabilities.
// Distances entered as exact rationals keep their exact forms so that the
// commensurability of the ratios d_j/d_0 can be decided exactly.  Media with
// non-positive distances are phase-analysis-only: intensity formulas are
// fine, the position sampler refuses them.
class HTMedium {
  public:
    HTMedium(std::vector<double> distances, ProbabilityVector probs, std::string name = {},
             std::vector<std::optional<Rational>> exact_distances = {},
             std::vector<std::optional<Rational>> exact_ratios = {})
        : distances_(std::move(distances)), p_(std::move(probs)), label_(std::move(name)),
          exact_distances_(std::move(exact_distances)), exact_ratios_(std::move(exact_ratios)) {
        if (distances_.empty() || distances_.size() != p_.size()) {
            throw std::invalid_argument("HTMedium: need one distance per probability");
        }
        if (!exact_distances_.empty() && exact_distances_.size() != distances_.size()) {
            throw std::invalid_argument("HTMedium: exact distances must parallel distances");
        }
        if (!exact_ratios_.empty() && exact_ratios_.size() + 1 != distances_.size()) {
            throw std::invalid_argument("HTMedium: exact ratios must have M-1 entries");
        }
        for (std::size_t j = 0; j < distances_.size(); ++j) {
            if (!std::isfinite(distances_[j])) {
                throw std::invalid_argument("HTMedium: distances must be finite");
            }
            if (j < exact_distances_.size() && exact_distances_[j].has_value() &&
                std::abs(distances_[j] - exact_distances_[j]->to_double()) > 1e-12) {
                throw std::invalid_argument("HTMedium: exact distance disagrees with numeric value");
            }
        }
        if (distances_[0] == 0.0) {
            throw std::invalid_argument("HTMedium: reference distance d_0 must be nonzero");
        }
        phase_only_ = std::any_of(distances_.begin(), distances_.end(),
                                  [](double d) { return d <= 0.0; });
        // Ratios from exact distances, unless the caller supplied them.
        if (exact_ratios_.empty() && exact_distances_.size() == distances_.size() &&
            exact_distances_[0].has_value()) {
            exact_ratios_.resize(distances_.size() - 1);
            for (std::size_t j = 1; j < distances_.size(); ++j) {
                if (exact_distances_[j].has_value()) {
                    exact_ratios_[j - 1] = *exact_distances_[j] / *exact_distances_[0];
                }
            }
        }
    }

    std::size_t size() const { return distances_.size(); }
    const std::vector<double>& distances() const { return distances_; }
    const ProbabilityVector& p() const { return p_; }
    const std::string& label() const { return label_; }
    bool phase_only() const { return phase_only_; }

    std::optional<Rational> exact_distance_at(std::size_t j) const {
        if (j < exact_distances_.size()) {
            return exact_distances_[j];
        }
        return std::nullopt;
    }

    // d_j/d_0 for j = 1..M-1, with exact forms where available.
    PhaseVector distance_ratios() const {
        std::vector<double> values(distances_.size() - 1);
        std::vector<std::optional<Rational>> exact(distances_.size() - 1);
        for (std::size_t j = 1; j < distances_.size(); ++j) {
            if (j - 1 < exact_ratios_.size() && exact_ratios_[j - 1].has_value()) {
                exact[j - 1] = exact_ratios_[j - 1];
                values[j - 1] = exact_ratios_[j - 1]->to_double();
            } else {
                values[j - 1] = distances_[j] / distances_[0];
            }
        }
        return PhaseVector(std::move(values), std::move(exact));
    }

  private:
    std::vector<double> distances_;
    ProbabilityVector p_;
    std::string label_;
    std::vector<std::optional<Rational>> exact_distances_;
    std::vector<std::optional<Rational>> exact_ratios_;
    bool phase_only_ = false;
};

enum class IntensityMethod { Exact, MonteCarlo, Asymptotic };

inline const char* to_string(IntensityMethod m) {
    switch (m) {
        case IntensityMethod::Exact: return "exact";
        case IntensityMethod::MonteCarlo: return "mc";
        case IntensityMethod::Asymptotic: return "asymptotic";
    }
    return "?";
}

struct IntensityProfile {
    std::vector<double> q_grid;
    std::int64_t n_layers = 0;  // 0 for the asymptotic (n -> infinity) profile
    IntensityMethod method = IntensityMethod::Exact;
    std::vector<double> intensity;               // NaN where asymptotic form diverges
    std::optional<std::vector<double>> stderr_;  // Monte Carlo only
    std::vector<bool> near_coherent;             // |1 - C(q)| < delta
};

struct BraggPrediction {
    bool commensurate = false;
    std::optional<std::int64_t> m0;
    std::optional<double> q0;       // 2 pi m0 / d0
    std::optional<double> lambda0;  // d0 / m0
    std::vector<double> peak_wavenumbers;  // k * q0, k = 1..K
    CommensurabilityReport report;
};

// C(q) = sum_j p_j e^{i q d_j}, phases reduced mod 2 pi exactly enough that
// commensurate wave numbers give C = 1 exactly.
inline std::complex<double> coherence_at(const HTMedium& medium, double q) {
    const double v = q / (2.0 * std::numbers::pi);
    std::complex<double> c(0.0, 0.0);
    for (std::size_t j = 0; j < medium.size(); ++j) {
        c += medium.p()[j] * unit_phasor(detail::product_fraction(v, medium.distances()[j]));
    }
    return c;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Independent substream for (seed, sample): reordering or parallelising
// samples cannot change any draw.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t sample) {
    return std::mt19937_64(splitmix64(splitmix64(seed) + sample));
}

// Uniform in [0, 1) from the top 53 bits; avoids distribution objects whose
// output is implementation-defined.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t sample_index(std::mt19937_64& rng, const std::vector<double>& cumulative) {
    const double u = uniform01(rng);
    for (std::size_t j = 0; j + 1 < cumulative.size(); ++j) {
        if (u < cumulative[j]) {
            return j;
        }
    }
    return cumulative.size() - 1;
}

inline std::vector<double> cumulative_probs(const ProbabilityVector& p) {
    std::vector<double> c(p.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        acc += p[j];
        c[j] = acc;
    }
    return c;
}

// sum_{r=1}^{n-1} (n - r) z^r, switching between the closed form and the
// direct ramp near z = 1.
inline std::complex<double> ramped_geometric(std::complex<double> z, std::int64_t n) {
    const std::complex<double> one(1.0, 0.0);
    if (std::abs(one - z) <= kNearCoherenceDelta) {
        std::complex<double> acc(0.0, 0.0);
        std::complex<double> zr(1.0, 0.0);
        for (std::int64_t r = 1; r < n; ++r) {
            zr *= z;
            acc += static_cast<double>(n - r) * zr;
        }
        return acc;
    }
    const std::complex<double> zn1 = pow_int(z, n - 1);
    const std::complex<double> zn = zn1 * z;
    const std::complex<double> nm = one - z;
    const double nd = static_cast<double>(n);
    return nd * z * (one - zn1) / nm - z * (one - nd * zn1 + (nd - 1.0) * zn) / (nm * nm);
}

}  // namespace detail

// Random-walk positions Z_0 = 0, Z_j = Z_{j-1} + d_{J_j}, J i.i.d. from p.
// Requires strictly positive distances; fully determined by the seed.
inline std::vector<double> sample_positions(const HTMedium& medium, std::int64_t n,
                                            std::uint64_t seed) {
    if (n < 1) {
        throw std::invalid_argument("sample_positions: n must be >= 1");
    }
    if (medium.phase_only()) {
        throw std::invalid_argument("sample_positions: all distances must be positive for sampling");
    }
    auto rng = detail::substream(seed, 0);
    const std::vector<double> cum = detail::cumulative_probs(medium.p());
    std::vector<double> z(static_cast<std::size_t>(n));
    z[0] = 0.0;
    for (std::int64_t j = 1; j < n; ++j) {
        const std::size_t idx = detail::sample_index(rng, cum);
        z[static_cast<std::size_t>(j)] = z[static_cast<std::size_t>(j - 1)] + medium.distances()[idx];
    }
    return z;
}

// Expected intensity at wave number q for n layers.
inline double exact_intensity(const HTMedium& medium, std::int64_t n, double q) {
    if (n < 1) {
        throw std::invalid_argument("exact_intensity: n must be >= 1");
    }
    const std::complex<double> z = coherence_at(medium, q);
    const std::complex<double> s = detail::ramped_geometric(z, n);
    return static_cast<double>(n) + 2.0 * s.real();
}

// Same expectation by enumerating all M^{n-1} spacing sequences; the
// independent oracle for the formula path.
inline double exact_intensity_bruteforce(const HTMedium& medium, std::int64_t n, double q) {
    if (n < 1) {
        throw std::invalid_argument("exact_intensity_bruteforce: n must be >= 1");
    }
    const std::size_t M = medium.size();
    double seq_count = 1.0;
    for (std::int64_t i = 0; i + 1 < n; ++i) {
        seq_count *= static_cast<double>(M);
        if (seq_count > 2e7) {
            throw resource_limit_error(
                "exact_intensity_bruteforce: M^(n-1) exceeds the bound 2e7 (M = " + std::to_string(M) +
                ", n = " + std::to_string(n) + ")");
        }
    }
    const double v = q / (2.0 * std::numbers::pi);
    std::vector<std::complex<double>> step(M);
    for (std::size_t j = 0; j < M; ++j) {
        step[j] = std::conj(unit_phasor(detail::product_fraction(v, medium.distances()[j])));
    }
    double acc = 0.0;
    const std::function<void(std::int64_t, std::complex<double>, std::complex<double>, double)> walk =
        [&](std::int64_t depth, std::complex<double> cur, std::complex<double> u, double prob) {
            if (depth == n - 1) {
                acc += prob * std::norm(u);
                return;
            }
            for (std::size_t j = 0; j < M; ++j) {
                const std::complex<double> next = cur * step[j];
                walk(depth + 1, next, u + next, prob * medium.p()[j]);
            }
        };
    walk(0, {1.0, 0.0}, {1.0, 0.0}, 1.0);
    return acc;
}

// Monte Carlo estimate of I(q) over a grid: mean over `samples` independent
// walks of |sum_j e^{-i q Z_j}|^2 with its standard error.  Sample s draws
// from substream (seed, s), so the result does not depend on evaluation
// order or the number of workers.
inline IntensityProfile monte_carlo_intensity(const HTMedium& medium, std::int64_t n,
                                              std::vector<double> q_grid, std::int64_t samples,
                                              std::uint64_t seed) {
    if (n < 1) {
        throw std::invalid_argument("monte_carlo_intensity: n must be >= 1");
    }
    if (samples < 2) {
        throw std::invalid_argument("monte_carlo_intensity: samples must be >= 2");
    }
    if (medium.phase_only()) {
        throw std::invalid_argument("monte_carlo_intensity: all distances must be positive for sampling");
    }
    const std::size_t M = medium.size();
    const std::size_t Q = q_grid.size();
    std::vector<std::vector<std::complex<double>>> step(Q, std::vector<std::complex<double>>(M));
    for (std::size_t iq = 0; iq < Q; ++iq) {
        const double v = q_grid[iq] / (2.0 * std::numbers::pi);
        for (std::size_t j = 0; j < M; ++j) {
            step[iq][j] = std::conj(unit_phasor(detail::product_fraction(v, medium.distances()[j])));
        }
    }
    const std::vector<double> cum = detail::cumulative_probs(medium.p());
    std::vector<double> sum(Q, 0.0), sumsq(Q, 0.0);
    std::vector<std::size_t> idx(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
    for (std::int64_t s = 0; s < samples; ++s) {
        auto rng = detail::substream(seed, static_cast<std::uint64_t>(s));
        for (auto& i : idx) {
            i = detail::sample_index(rng, cum);
        }
        for (std::size_t iq = 0; iq < Q; ++iq) {
            std::complex<double> cur(1.0, 0.0);
            std::complex<double> u(1.0, 0.0);
            for (const std::size_t i : idx) {
                cur *= step[iq][i];
                u += cur;
            }
            const double w = std::norm(u);
            sum[iq] += w;
            sumsq[iq] += w * w;
        }
    }
    IntensityProfile out;
    out.q_grid = std::move(q_grid);
    out.n_layers = n;
    out.method = IntensityMethod::MonteCarlo;
    out.intensity.resize(Q);
    out.stderr_ = std::vector<double>(Q);
    out.near_coherent.resize(Q);
    const double sd = static_cast<double>(samples);
    for (std::size_t iq = 0; iq < Q; ++iq) {
        const double mean = sum[iq] / sd;
        const double var = std::max(0.0, (sumsq[iq] - sd * mean * mean) / (sd - 1.0));
        out.intensity[iq] = mean;
        (*out.stderr_)[iq] = std::sqrt(var / sd);
        out.near_coherent[iq] = std::abs(1.0 - coherence_at(medium, out.q_grid[iq])) < kNearCoherenceDelta;
    }
    return out;
}

// Limit intensity per layer: (1 - |C|^2)/|1 - C|^2.  Diverges at coherent
// wave numbers, which are excluded by precondition.
inline double asymptotic_intensity(const HTMedium& medium, double q) {
    const std::complex<double> c = coherence_at(medium, q);
    const double gap = std::abs(1.0 - c);
    if (gap <= kNearCoherenceDelta) {
        throw std::domain_error("near-Bragg: asymptotic form diverges");
    }
    return std::max(0.0, (1.0 - std::norm(c)) / (gap * gap));
}

// Grid version of exact_intensity, with the near-coherence mask filled in.
inline IntensityProfile exact_intensity_profile(const HTMedium& medium, std::int64_t n,
                                                std::vector<double> q_grid) {
    IntensityProfile out;
    out.q_grid = std::move(q_grid);
    out.n_layers = n;
    out.method = IntensityMethod::Exact;
    out.intensity.reserve(out.q_grid.size());
    out.near_coherent.reserve(out.q_grid.size());
    for (const double q : out.q_grid) {
        out.intensity.push_back(exact_intensity(medium, n, q));
        out.near_coherent.push_back(std::abs(1.0 - coherence_at(medium, q)) < kNearCoherenceDelta);
    }
    return out;
}

// Grid version of asymptotic_intensity: near-coherent entries become NaN and
// are marked in the mask instead of throwing.
inline IntensityProfile asymptotic_intensity_profile(const HTMedium& medium,
                                                     std::vector<double> q_grid) {
    IntensityProfile out;
    out.q_grid = std::move(q_grid);
    out.n_layers = 0;
    out.method = IntensityMethod::Asymptotic;
    out.intensity.reserve(out.q_grid.size());
    out.near_coherent.reserve(out.q_grid.size());
    for (const double q : out.q_grid) {
        const bool near = std::abs(1.0 - coherence_at(medium, q)) <= kNearCoherenceDelta;
        out.near_coherent.push_back(near);
        out.intensity.push_back(near ? std::numeric_limits<double>::quiet_NaN()
                                     : asymptotic_intensity(medium, q));
    }
    return out;
}

// Classifies the distance ratios; for commensurate media emits m0, the
// fundamental wave number q0 = 2 pi m0 / d0 (fundamental wavelength
// lambda0 = d0/m0) and the first K Bragg peaks k*q0.
inline BraggPrediction predict_bragg(const HTMedium& medium, std::int64_t qmax, double tol,
                                     std::int64_t K) {
    if (K < 1) {
        throw std::invalid_argument("predict_bragg: K must be >= 1");
    }
    BraggPrediction out;
    const double d0 = medium.distances()[0];
    if (medium.size() == 1) {
        // Single spacing: trivially commensurate with itself.
        out.commensurate = true;
        out.m0 = 1;
        out.report.classification = Commensurability::Rational;
        out.report.m0 = 1;
        out.report.tolerance_used = tol;
        out.report.qmax_used = qmax;
    } else {
        out.report = classify_commensurability(medium.distance_ratios(), qmax, tol);
        out.commensurate = out.report.classification == Commensurability::Rational;
        out.m0 = out.report.m0;
    }
    if (out.commensurate) {
        const double m0 = static_cast<double>(*out.m0);
        out.q0 = 2.0 * std::numbers::pi * m0 / d0;
        out.lambda0 = d0 / m0;
        out.report.fundamental_frequency = out.q0;
        out.peak_wavenumbers.reserve(static_cast<std::size_t>(K));
        for (std::int64_t k = 1; k <= K; ++k) {
            out.peak_wavenumbers.push_back(static_cast<double>(k) * *out.q0);
        }
    }
    return out;
}

// True iff the intensity at q scales as n^2 (within 1e-6 relative) across
// the whole increasing n list.
inline bool detect_bragg(const HTMedium& medium, double q, const std::vector<std::int64_t>& n_list) {
    if (n_list.size() < 3 || !std::is_sorted(n_list.begin(), n_list.end()) ||
        std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end()) {
        throw std::invalid_argument("detect_bragg: need at least 3 strictly increasing n values");
    }
    for (const std::int64_t n : n_list) {
        const double ratio = exact_intensity(medium, n, q) /
                             (static_cast<double>(n) * static_cast<double>(n));
        if (ratio < 1.0 - 1e-6 || ratio > 1.0 + 1e-6) {
            return false;
        }
    }
    return true;
}

}  // namespace phaselab

#pragma once

/*
 * redundancy.hpp — average redundancy of the Shannon code.
 *
 * For a memoryless source with symbol probabilities p_j, blocks of length n
 * are coded with ceil(-log2 P(x)) bits, and the average redundancy is
 *
 *     R_n = E{ceil(-log2 P(X))} - n H = E{ceil(t) - t},   t = -log2 P(X).
 *
 * The second form is how the exact path actually sums: every term lies in
 * [0, 1), so no large-number cancellation ever happens.  Three methods:
 *
 *   exact       — sum over composition (type-class) vectors, multinomial
 *                 weights accumulated in the log domain.  O(C(n+M-1, M-1)).
 *   series      — truncated Fourier expansion of <u>:
 *                 R_n = 1/2 + sum_{m!=0} a_m e^{2 pi i m n beta} C_m^n,
 *                 summed as 2 Re over m >= 1 with C_m^n by squaring.
 *   asymptotic  — the large-n limit: 1/2 when incommensurate, otherwise
 *                 1/2 + (1/m0)(1/2 - <beta m0 n>).
 *
 * The ceiling is discontinuous exactly where the Fourier identity
 * ceil(u) = u + 1 - <u> fails (integer u).  Compositions that land within
 * 1e-9 of an integer are flagged; with exact rational probabilities the
 * boundary is decided exactly (is the product of p_j^{k_j} a power of two?)
 * for n <= 1000.  Dyadic sources (every -log2 p_j an integer) sit on the
 * discontinuity for every n: the exact method returns the true value and the
 * formula methods return their formula values, flagged.
 */

#include "phaselab/coherence.hpp"
#include "phaselab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace phaselab {

inline constexpr const char* kFlagNearBoundary = "near-integer-boundary";
inline constexpr const char* kFlagExactInteger = "exact-integer";
inline constexpr const char* kFlagDyadicDegenerate = "dyadic-degenerate";
inline constexpr const char* kFlagFormulaDiscontinuity = "formula-discontinuity";

struct SourceModel {
    ProbabilityVector p;
    std::string label;

    explicit SourceModel(ProbabilityVector probs, std::string name = {})
        : p(std::move(probs)), label(std::move(name)) {
        if (p.size() < 2) {
            throw std::invalid_argument("SourceModel: alphabet must have at least two symbols");
        }
    }
};

struct SourceAnalysis {
    PhaseVector alpha;                  // alpha_j = log2(p_0 / p_j), j = 1..M-1
    double beta = 0.0;                  // -log2 p_0
    double entropy = 0.0;               // bits per symbol
    CommensurabilityReport report;
    std::optional<double> omega0;       // 2 pi m0 beta mod 2 pi, present iff m0 is
};

enum class RedundancyMethod { Exact, TruncatedSeries, Asymptotic };

inline const char* to_string(RedundancyMethod m) {
    switch (m) {
        case RedundancyMethod::Exact: return "exact";
        case RedundancyMethod::TruncatedSeries: return "series";
        case RedundancyMethod::Asymptotic: return "asymptotic";
    }
    return "?";
}

struct RedundancySeries {
    std::int64_t n_start = 1;
    std::int64_t n_end = 1;
    RedundancyMethod method = RedundancyMethod::Exact;
    std::vector<double> values;
    std::vector<std::vector<std::string>> flags;  // parallel to values
};

struct SpectrumReport {
    std::pair<std::int64_t, std::int64_t> window;
    std::vector<double> peak_frequencies;  // cycles per index step, in [0, 0.5]
    std::vector<double> peak_magnitudes;   // sorted descending, parallel
    double resolution = 0.0;               // 1 / window length
};

namespace detail {

// Code-length coefficients c_j = -log2 p_j.  With exact probabilities the
// logs are taken of the exact integer parts, which is both a little more
// accurate and independent of how the double probability was rounded.
inline std::vector<double> code_length_coefficients(const SourceModel& src) {
    std::vector<double> c(src.p.size());
    for (std::size_t j = 0; j < src.p.size(); ++j) {
        const auto e = src.p.exact_at(j);
        if (e.has_value()) {
            c[j] = std::log2(e->denominator().convert_to<double>()) -
                   std::log2(e->numerator().convert_to<double>());
        } else {
            c[j] = -std::log2(src.p[j]);
        }
    }
    return c;
}

// alpha_j = log2(p_0/p_j) with exact rational forms where the ratio is a
// provable power of two.
inline PhaseVector derive_alpha(const SourceModel& src) {
    const std::size_t M = src.p.size();
    std::vector<double> values(M - 1);
    std::vector<std::optional<Rational>> exact(M - 1);
    const auto e0 = src.p.exact_at(0);
    for (std::size_t j = 1; j < M; ++j) {
        const auto ej = src.p.exact_at(j);
        if (e0.has_value() && ej.has_value()) {
            exact[j - 1] = log2_of_rational(*e0 / *ej);
        }
        if (exact[j - 1].has_value()) {
            values[j - 1] = exact[j - 1]->to_double();
        } else {
            values[j - 1] = std::log2(src.p[0] / src.p[j]);
        }
    }
    return PhaseVector(std::move(values), std::move(exact));
}

inline double derive_beta(const SourceModel& src) {
    const auto e0 = src.p.exact_at(0);
    if (e0.has_value()) {
        return std::log2(e0->denominator().convert_to<double>()) -
               std::log2(e0->numerator().convert_to<double>());
    }
    return -std::log2(src.p[0]);
}

// True when every symbol probability is a power of 1/2, i.e. every block
// probability is an exact power of two and the ceiling is degenerate.
inline bool is_dyadic_source(const SourceModel& src) {
    for (std::size_t j = 0; j < src.p.size(); ++j) {
        const auto e = src.p.exact_at(j);
        if (e.has_value()) {
            if (e->numerator() != 1 || !is_power_of_two(e->denominator())) {
                return false;
            }
        } else {
            const double c = -std::log2(src.p[j]);
            if (std::abs(c - std::round(c)) > 1e-12) {
                return false;
            }
        }
    }
    return true;
}

// Visits every composition (k_0..k_{M-1}) with sum n.
template <typename F>
void for_each_composition(std::int64_t n, std::size_t M, F&& visit) {
    std::vector<std::int64_t> k(M, 0);
    const std::function<void(std::size_t, std::int64_t)> walk = [&](std::size_t j, std::int64_t rem) {
        if (j + 1 == M) {
            k[j] = rem;
            visit(k);
            return;
        }
        for (std::int64_t v = 0; v <= rem; ++v) {
            k[j] = v;
            walk(j + 1, rem - v);
        }
    };
    walk(0, n);
}

// C(n+M-1, M-1) without overflow, saturating at huge.
inline double composition_count(std::int64_t n, std::size_t M) {
    double c = 1.0;
    for (std::size_t i = 1; i < M; ++i) {
        c *= static_cast<double>(n + static_cast<std::int64_t>(i)) / static_cast<double>(i);
        if (c > 1e18) {
            return c;
        }
    }
    return c;
}

// Exact ceiling decision for t = -log2 of prod (a_j/b_j)^{k_j} when t sits
// within the flag window.  Returns the exact ceiling, or nullopt if the
// product is exactly a power of two (t integer, ceil(t) - t = 0).
struct BoundaryResolution {
    bool exact_integer = false;
    std::int64_t ceiling = 0;  // valid when !exact_integer
};

inline std::optional<BoundaryResolution> resolve_boundary_exact(const SourceModel& src,
                                                                const std::vector<std::int64_t>& k,
                                                                double t) {
    if (!src.p.all_exact()) {
        return std::nullopt;
    }
    BigInt num = 1, den = 1;
    for (std::size_t j = 0; j < k.size(); ++j) {
        if (k[j] == 0) {
            continue;
        }
        const auto e = src.p.exact_at(j);
        num *= boost::multiprecision::pow(e->numerator(), static_cast<unsigned>(k[j]));
        den *= boost::multiprecision::pow(e->denominator(), static_cast<unsigned>(k[j]));
    }
    // P = num/den; t = -log2 P is integer iff the odd parts cancel.
    const BigInt odd_num = num >> boost::multiprecision::lsb(num);
    const BigInt odd_den = den >> boost::multiprecision::lsb(den);
    BoundaryResolution out;
    if (odd_num == odd_den) {
        out.exact_integer = true;
        return out;
    }
    // Compare P against 2^-i for the nearest integer i: t > i iff P < 2^-i.
    const std::int64_t i = std::llround(t);
    BigInt lhs = num, rhs = den;
    if (i >= 0) {
        lhs <<= static_cast<unsigned>(i);
    } else {
        rhs <<= static_cast<unsigned>(-i);
    }
    out.ceiling = (lhs < rhs) ? i + 1 : i;
    return out;
}

struct RedundancyValue {
    double value = 0.0;
    std::vector<std::string> flags;
};

inline void add_flag(std::vector<std::string>& flags, const char* flag) {
    if (std::find(flags.begin(), flags.end(), flag) == flags.end()) {
        flags.emplace_back(flag);
    }
}

inline RedundancyValue exact_redundancy_detailed(const SourceModel& src, std::int64_t n) {
    if (n < 1) {
        throw std::invalid_argument("exact_redundancy: n must be >= 1");
    }
    const std::size_t M = src.p.size();
    if (M > 6) {
        throw resource_limit_error("exact_redundancy: alphabet size M = " + std::to_string(M) +
                                   " exceeds the bound M <= 6");
    }
    const double n_comp = composition_count(n, M);
    if (n_comp > 1e8) {
        throw resource_limit_error("exact_redundancy: composition count C(n+M-1, M-1) exceeds the bound 1e8 (n = " +
                                   std::to_string(n) + ", M = " + std::to_string(M) + ")");
    }
    const std::vector<double> c = code_length_coefficients(src);
    std::vector<double> lnp(M);
    for (std::size_t j = 0; j < M; ++j) {
        lnp[j] = std::log(src.p[j]);
    }
    const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
    const bool can_resolve = src.p.all_exact() && n <= 1000;

    RedundancyValue out;
    double acc = 0.0;
    for_each_composition(n, M, [&](const std::vector<std::int64_t>& k) {
        double logw = lg_n1;
        double t = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            logw += -std::lgamma(static_cast<double>(k[j]) + 1.0) + static_cast<double>(k[j]) * lnp[j];
            t += static_cast<double>(k[j]) * c[j];
        }
        const double w = std::exp(logw);
        const double dist = std::abs(t - std::round(t));
        double v;
        if (dist <= 1e-9) {
            add_flag(out.flags, kFlagNearBoundary);
            const auto res = can_resolve ? resolve_boundary_exact(src, k, t) : std::nullopt;
            if (res.has_value()) {
                if (res->exact_integer) {
                    add_flag(out.flags, kFlagExactInteger);
                    v = 0.0;
                } else {
                    v = static_cast<double>(res->ceiling) - t;
                }
            } else {
                v = std::ceil(t) - t;
            }
        } else {
            v = std::ceil(t) - t;
        }
        acc += w * v;
    });
    out.value = acc;
    return out;
}

}  // namespace detail

// Fills alpha, beta, entropy, the commensurability report, and (rational
// case) the fundamental frequency omega0 = 2 pi m0 beta mod 2 pi.
inline SourceAnalysis analyze_source(const SourceModel& src, std::int64_t qmax, double tol) {
    SourceAnalysis a{detail::derive_alpha(src), 0.0, 0.0, {}, std::nullopt};
    a.beta = detail::derive_beta(src);
    double h = 0.0;
    for (std::size_t j = 0; j < src.p.size(); ++j) {
        h -= src.p[j] * std::log2(src.p[j]);
    }
    a.entropy = h;
    a.report = classify_commensurability(a.alpha, qmax, tol);
    if (a.report.m0.has_value()) {
        const double f = fractional_part_of_product(a.beta, *a.report.m0);
        a.omega0 = 2.0 * std::numbers::pi * f;
        a.report.fundamental_frequency = a.omega0;
    }
    return a;
}

// E{ceil(-log2 P) + log2 P} by summing over type classes.
inline double exact_redundancy(const SourceModel& src, std::int64_t n) {
    return detail::exact_redundancy_detailed(src, n).value;
}

// Same expectation by explicit enumeration of all M^n sequences; the
// independent oracle for the type-class path.
inline double exact_redundancy_bruteforce(const SourceModel& src, std::int64_t n) {
    if (n < 1) {
        throw std::invalid_argument("exact_redundancy_bruteforce: n must be >= 1");
    }
    const std::size_t M = src.p.size();
    double seq_count = 1.0;
    for (std::int64_t i = 0; i < n; ++i) {
        seq_count *= static_cast<double>(M);
        if (seq_count > 2e7) {
            throw resource_limit_error(
                "exact_redundancy_bruteforce: M^n exceeds the bound 2e7 (M = " + std::to_string(M) +
                ", n = " + std::to_string(n) + ")");
        }
    }
    const std::vector<double> c = detail::code_length_coefficients(src);
    double acc = 0.0;
    const std::function<void(std::int64_t, double, double)> walk = [&](std::int64_t depth, double prob,
                                                                       double t) {
        if (depth == n) {
            acc += prob * (std::ceil(t) - t);
            return;
        }
        for (std::size_t j = 0; j < M; ++j) {
            walk(depth + 1, prob * src.p[j], t + c[j]);
        }
    };
    walk(0, 1.0, 0.0);
    return acc;
}

// Truncated Fourier-series value: 1/2 + 2 sum_{m=1}^{m_max} Re(a_m e^{2 pi i
// m n beta} C_m^n).
inline double series_redundancy(const SourceModel& src, std::int64_t n, std::int64_t m_max) {
    if (n < 1) {
        throw std::invalid_argument("series_redundancy: n must be >= 1");
    }
    if (m_max < 1) {
        throw std::invalid_argument("series_redundancy: m_max must be >= 1");
    }
    const PhaseVector alpha = detail::derive_alpha(src);
    const double beta = detail::derive_beta(src);
    const double fn = fractional_part_of_product(beta, n);  // <n beta>
    double sum = 0.0;
    for (std::int64_t m = 1; m <= m_max; ++m) {
        const std::complex<double> cm = coherence_sum(src.p, alpha, m);
        const std::complex<double> cmn = detail::pow_int(cm, n);
        const std::complex<double> phase = unit_phasor(fractional_part_of_product(fn, m));
        sum += 2.0 * std::real(fourier_coefficient(m) * phase * cmn);
    }
    return 0.5 + sum;
}

// Large-n closed form.  Rational case: 1/2 + (1/m0)(1/2 - <beta m0 n>);
// otherwise the constant 1/2.
inline double asymptotic_redundancy(const SourceAnalysis& analysis, std::int64_t n) {
    if (n < 1) {
        throw std::invalid_argument("asymptotic_redundancy: n must be >= 1");
    }
    if (analysis.report.classification != Commensurability::Rational) {
        return 0.5;
    }
    const std::int64_t m0 = *analysis.report.m0;
    const double fn = fractional_part_of_product(analysis.beta, n);
    const double f = fractional_part_of_product(fn, m0);  // <beta m0 n>
    return 0.5 + (0.5 - f) / static_cast<double>(m0);
}

struct RedundancySeriesOptions {
    RedundancyMethod method = RedundancyMethod::Exact;
    std::int64_t m_max = 10000;   // TruncatedSeries only
    std::int64_t qmax = 1000000;  // commensurability scan (Asymptotic)
    double tol = 1e-12;
};

// Batch driver: R_n for n in [n_start, n_end] by the chosen method, with
// per-n warning flags.  Deterministic.
inline RedundancySeries redundancy_series(const SourceModel& src, std::int64_t n_start,
                                          std::int64_t n_end, const RedundancySeriesOptions& opts) {
    if (n_start < 1 || n_end < n_start) {
        throw std::invalid_argument("redundancy_series: require 1 <= n_start <= n_end");
    }
    RedundancySeries out;
    out.n_start = n_start;
    out.n_end = n_end;
    out.method = opts.method;
    const std::size_t count = static_cast<std::size_t>(n_end - n_start + 1);
    out.values.reserve(count);
    out.flags.reserve(count);

    const bool dyadic = detail::is_dyadic_source(src);
    std::optional<SourceAnalysis> analysis;
    if (opts.method == RedundancyMethod::Asymptotic) {
        analysis = analyze_source(src, opts.qmax, opts.tol);
    }
    for (std::int64_t n = n_start; n <= n_end; ++n) {
        std::vector<std::string> flags;
        double value = 0.0;
        switch (opts.method) {
            case RedundancyMethod::Exact: {
                auto detailed = detail::exact_redundancy_detailed(src, n);
                value = detailed.value;
                flags = std::move(detailed.flags);
                break;
            }
            case RedundancyMethod::TruncatedSeries: {
                value = series_redundancy(src, n, opts.m_max);
                if (dyadic) {
                    detail::add_flag(flags, kFlagDyadicDegenerate);
                }
                break;
            }
            case RedundancyMethod::Asymptotic: {
                value = asymptotic_redundancy(*analysis, n);
                if (analysis->report.m0.has_value()) {
                    const double fn = fractional_part_of_product(analysis->beta, n);
                    const double f = fractional_part_of_product(fn, *analysis->report.m0);
                    if (f < 1e-9 || f > 1.0 - 1e-9) {
                        detail::add_flag(flags, kFlagFormulaDiscontinuity);
                    }
                }
                if (dyadic) {
                    detail::add_flag(flags, kFlagDyadicDegenerate);
                }
                break;
            }
        }
        out.values.push_back(value);
        out.flags.push_back(std::move(flags));
    }
    return out;
}

// Mean-removed DFT of the series; local maxima above 5x the median bin
// magnitude, reported in cycles per step (folded to [0, 1/2]) and sorted by
// descending magnitude.
inline SpectrumReport spectrum(const RedundancySeries& series) {
    const std::size_t N = series.values.size();
    if (N < 64) {
        throw std::invalid_argument("spectrum: series must have at least 64 samples");
    }
    double mean = 0.0;
    for (const double v : series.values) {
        mean += v;
    }
    mean /= static_cast<double>(N);

    const std::size_t half = N / 2;
    std::vector<double> mag(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N);
        const std::complex<double> step(std::cos(angle), std::sin(angle));
        std::complex<double> w(1.0, 0.0);
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            acc += (series.values[i] - mean) * w;
            w *= step;
        }
        mag[k] = std::abs(acc);
    }
    std::vector<double> sorted = mag;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                     sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double threshold = 5.0 * median;

    std::vector<std::pair<double, double>> peaks;  // (magnitude, frequency)
    for (std::size_t k = 1; k + 1 <= half; ++k) {
        if (mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] > threshold) {
            peaks.emplace_back(mag[k], static_cast<double>(k) / static_cast<double>(N));
        }
    }
    std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    SpectrumReport report;
    report.window = {series.n_start, series.n_end};
    report.resolution = 1.0 / static_cast<double>(N);
    report.peak_frequencies.reserve(peaks.size());
    report.peak_magnitudes.reserve(peaks.size());
    for (const auto& [m, f] : peaks) {
        report.peak_frequencies.push_back(f);
        report.peak_magnitudes.push_back(m);
    }
    return report;
}

}  // namespace phaselab

#pragma once

/*
 * duality.hpp — the dictionary between the two problems.
 *
 * A memoryless source and a layer medium share the same phase system when
 * the source parameters alpha_j = log2(p_0/p_j) equal the distance ratios
 * d_j/d_0.  Fixing the scale by d_0 = 1/beta (beta = -log2 p_0) makes the
 * spectral side of the dictionary literal: the fundamental oscillation
 * frequency omega_0 = 2 pi m_0 beta of the redundancy sequence and the
 * fundamental Bragg wave number q_0 = 2 pi m_0 / d_0 coincide (mod 2 pi).
 *
 * The alphabet is relabelled so that p_0 is the largest probability, which
 * keeps every alpha_j >= 0; redundancy is invariant under the relabelling.
 * alpha_j = 0 (tied probabilities) maps to a zero distance, so the conjugate
 * medium can be phase-analysis-only.
 */

#include "phaselab/diffraction.hpp"
#include "phaselab/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace phaselab {

struct CorrespondenceReport {
    std::optional<std::int64_t> source_m0;
    std::optional<std::int64_t> medium_m0;
    std::optional<double> omega0;  // 2 pi m0 beta mod 2 pi
    std::optional<double> q0;      // 2 pi m0 / d0
    bool matched = false;
    std::vector<std::size_t> relabeling;  // new index -> original symbol
    Commensurability source_classification = Commensurability::IrrationalAtTolerance;
    Commensurability medium_classification = Commensurability::IrrationalAtTolerance;
};

namespace detail {

// Relabelling that moves the most probable symbol to the front (ties broken
// by lowest original index), keeping the others in original order.
inline std::vector<std::size_t> max_first_permutation(const ProbabilityVector& p) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.size(); ++j) {
        if (p[j] > p[best]) {
            best = j;
        }
    }
    std::vector<std::size_t> perm;
    perm.reserve(p.size());
    perm.push_back(best);
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (j != best) {
            perm.push_back(j);
        }
    }
    return perm;
}

inline SourceModel relabel(const SourceModel& src, const std::vector<std::size_t>& perm) {
    std::vector<double> probs(perm.size());
    std::vector<std::optional<Rational>> exact(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) {
        probs[j] = src.p[perm[j]];
        exact[j] = src.p.exact_at(perm[j]);
    }
    return SourceModel(ProbabilityVector(std::move(probs), std::move(exact)), src.label);
}

}  // namespace detail

// The conjugate medium of a source: relabel so p_0 is maximal, then
// d_0 = 1/beta and d_j = alpha_j * d_0 (so d_j/d_0 = alpha_j >= 0).  The
// medium keeps the (relabelled) probabilities; it is phase-analysis-only
// whenever some alpha_j = 0.
inline HTMedium conjugate_medium(const SourceModel& src, std::int64_t qmax, double tol) {
    const auto perm = detail::max_first_permutation(src.p);
    const SourceModel relabeled = detail::relabel(src, perm);
    const SourceAnalysis analysis = analyze_source(relabeled, qmax, tol);
    const double d0 = 1.0 / analysis.beta;  // beta > 0 because p_0 < 1
    std::vector<double> distances(relabeled.p.size());
    std::vector<std::optional<Rational>> exact_ratios(relabeled.p.size() - 1);
    distances[0] = d0;
    for (std::size_t j = 1; j < relabeled.p.size(); ++j) {
        distances[j] = analysis.alpha[j - 1] * d0;
        exact_ratios[j - 1] = analysis.alpha.exact_at(j - 1);
    }
    return HTMedium(std::move(distances), relabeled.p, src.label, {}, std::move(exact_ratios));
}

// Runs both sides of the dictionary and compares: matched means the
// commensurability classifications agree and, in the rational case, the
// m0 values are equal and omega0 = q0 modulo 2 pi (within 1e-9).
inline CorrespondenceReport correspondence(const SourceModel& src, std::int64_t qmax, double tol) {
    CorrespondenceReport out;
    out.relabeling = detail::max_first_permutation(src.p);
    const SourceModel relabeled = detail::relabel(src, out.relabeling);
    const SourceAnalysis analysis = analyze_source(relabeled, qmax, tol);
    out.source_classification = analysis.report.classification;
    out.source_m0 = analysis.report.m0;
    out.omega0 = analysis.omega0;

    const HTMedium medium = conjugate_medium(src, qmax, tol);
    const BraggPrediction bragg = predict_bragg(medium, qmax, tol, 1);
    out.medium_classification = bragg.report.classification;
    out.medium_m0 = bragg.m0;
    out.q0 = bragg.q0;

    if (out.source_classification != out.medium_classification) {
        out.matched = false;
        return out;
    }
    if (out.source_classification != Commensurability::Rational) {
        out.matched = true;  // both peak-free
        return out;
    }
    if (!out.source_m0.has_value() || !out.medium_m0.has_value() ||
        *out.source_m0 != *out.medium_m0) {
        out.matched = false;
        return out;
    }
    // omega0 lives in [0, 2 pi); q0 = 2 pi m0 / d0 may exceed 2 pi.  Compare
    // on the circle.
    const double turns_omega = *out.omega0 / (2.0 * std::numbers::pi);
    const double turns_q = *out.q0 / (2.0 * std::numbers::pi);
    double diff = std::abs(fractional_part(turns_omega) - fractional_part(turns_q));
    diff = std::min(diff, 1.0 - diff);
    out.matched = diff * 2.0 * std::numbers::pi <= 1e-9;
    return out;
}

}  // namespace phaselab

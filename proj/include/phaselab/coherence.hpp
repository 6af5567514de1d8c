#pragma once

/*
 * coherence.hpp — the shared mathematical core.
 *
 * Everything in this library reduces to one object: given probabilities
 * (p_0..p_{M-1}) and phase parameters (a_1..a_{M-1}), the coherence sum
 *
 *     C_m = p_0 + sum_j p_j e^{2 pi i m a_j}
 *
 * has |C_m| <= 1, with equality C_m = 1 (full coherence of all M phasors)
 * exactly at integer multiples of m_0, the smallest positive integer making
 * every m_0 * a_j an integer — which exists iff every a_j is rational.
 *
 * Whether a floating-point a_j "is rational" is of course undecidable; the
 * classifier below is explicit about its verdict: a value is reported
 * Rational only when a continued-fraction convergent a/b with b <= qmax
 * brings b*x within tol of an integer, and callers see the qmax/tol used.
 * Declared-exact values (exact_forms) bypass reconstruction entirely.
 */

#include "phaselab/fractional.hpp"
#include "phaselab/rational.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phaselab {

// Probabilities p_0..p_{M-1}, optionally with declared-exact rational forms
// per entry; numeric values are validated against their exact forms at 1e-12.
class ProbabilityVector {
  public:
    explicit ProbabilityVector(std::vector<double> probs)
        : ProbabilityVector(std::move(probs), {}) {}

    ProbabilityVector(std::vector<double> probs, std::vector<std::optional<Rational>> exact)
        : probs_(std::move(probs)), exact_(std::move(exact)) {
        if (probs_.empty()) {
            throw std::invalid_argument("ProbabilityVector: at least one probability required");
        }
        if (!exact_.empty() && exact_.size() != probs_.size()) {
            throw std::invalid_argument("ProbabilityVector: exact forms must parallel probabilities");
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < probs_.size(); ++j) {
            if (!(probs_[j] > 0.0) || !std::isfinite(probs_[j])) {
                throw std::invalid_argument("ProbabilityVector: probabilities must be positive and finite");
            }
            if (j < exact_.size() && exact_[j].has_value() &&
                std::abs(probs_[j] - exact_[j]->to_double()) > 1e-12) {
                throw std::invalid_argument("ProbabilityVector: exact form disagrees with numeric value");
            }
            sum += probs_[j];
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw std::invalid_argument("ProbabilityVector: probabilities must sum to 1");
        }
        if (all_exact()) {
            Rational total(0);
            for (const auto& e : exact_) {
                total = total + *e;
            }
            if (total != Rational(1)) {
                throw std::invalid_argument("ProbabilityVector: exact probabilities must sum to exactly 1");
            }
        }
    }

    std::size_t size() const { return probs_.size(); }
    const std::vector<double>& probs() const { return probs_; }
    double operator[](std::size_t j) const { return probs_[j]; }

    std::optional<Rational> exact_at(std::size_t j) const {
        if (j < exact_.size()) {
            return exact_[j];
        }
        return std::nullopt;
    }

    bool all_exact() const {
        if (exact_.size() != probs_.size()) {
            return false;
        }
        for (const auto& e : exact_) {
            if (!e.has_value()) {
                return false;
            }
        }
        return true;
    }

  private:
    std::vector<double> probs_;
    std::vector<std::optional<Rational>> exact_;
};

// Phase parameters a_1..a_{M-1}; exact_forms[j], when present, declares a_j
// exactly rational (and must match the numeric value to 1e-12).
class PhaseVector {
  public:
    explicit PhaseVector(std::vector<double> values) : PhaseVector(std::move(values), {}) {}

    PhaseVector(std::vector<double> values, std::vector<std::optional<Rational>> exact_forms)
        : values_(std::move(values)), exact_(std::move(exact_forms)) {
        if (!exact_.empty() && exact_.size() != values_.size()) {
            throw std::invalid_argument("PhaseVector: exact forms must parallel values");
        }
        for (std::size_t j = 0; j < values_.size(); ++j) {
            if (!std::isfinite(values_[j])) {
                throw std::invalid_argument("PhaseVector: values must be finite");
            }
            if (j < exact_.size() && exact_[j].has_value() &&
                std::abs(values_[j] - exact_[j]->to_double()) > 1e-12) {
                throw std::invalid_argument("PhaseVector: exact form disagrees with numeric value");
            }
        }
    }

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t j) const { return values_[j]; }

    std::optional<Rational> exact_at(std::size_t j) const {
        if (j < exact_.size()) {
            return exact_[j];
        }
        return std::nullopt;
    }

  private:
    std::vector<double> values_;
    std::vector<std::optional<Rational>> exact_;
};

enum class Commensurability {
    Rational,                 // every phase reconstructed or declared rational
    IrrationalAtTolerance,    // at least one phase has no admissible convergent
    ExactIrrationalDeclared,  // reserved for inputs declared exactly irrational
};

inline const char* to_string(Commensurability c) {
    switch (c) {
        case Commensurability::Rational: return "Rational";
        case Commensurability::IrrationalAtTolerance: return "IrrationalAtTolerance";
        case Commensurability::ExactIrrationalDeclared: return "ExactIrrationalDeclared";
    }
    return "?";
}

// One examined approximation per phase value: the convergent and the
// distance of denominator*x from the nearest integer.
struct ConvergentRecord {
    Rational convergent;
    double residual = 0.0;
    bool admissible = false;  // residual <= tol (or declared exact)
};

struct CommensurabilityReport {
    Commensurability classification = Commensurability::IrrationalAtTolerance;
    std::optional<std::int64_t> m0;                  // present iff Rational
    std::optional<double> fundamental_frequency;     // set by callers that know beta or d0
    std::vector<ConvergentRecord> convergents_examined;
    double tolerance_used = 0.0;
    std::int64_t qmax_used = 0;
};

// Fourier coefficient of <u>: a_m = 1/(2 pi i m), m != 0.
inline std::complex<double> fourier_coefficient(std::int64_t m) {
    if (m == 0) {
        throw std::invalid_argument("fourier_coefficient: m must be nonzero");
    }
    const double im = -1.0 / (2.0 * std::numbers::pi * static_cast<double>(m));
    return {0.0, im};
}

// C_m = p_0 + sum_j p_j e^{2 pi i m a_j}.  Phases are reduced mod 1 before
// the trig call; declared-exact rational phases reduce in integer arithmetic
// so that full coherence comes out exactly 1.
inline std::complex<double> coherence_sum(const ProbabilityVector& p, const PhaseVector& alpha,
                                          std::int64_t m) {
    if (alpha.size() + 1 != p.size()) {
        throw std::invalid_argument("coherence_sum: alpha must have M-1 entries for M probabilities");
    }
    std::complex<double> c(p[0], 0.0);
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        double turns;
        const auto exact = alpha.exact_at(j);
        if (exact.has_value()) {
            // m * a/b mod 1 = (m*a mod b)/b, exactly.
            const BigInt num = BigInt(m) * exact->numerator();
            const BigInt den = exact->denominator();
            BigInt r = num % den;
            if (r < 0) {
                r += den;
            }
            turns = r.convert_to<double>() / den.convert_to<double>();
        } else {
            turns = fractional_part_of_product(alpha[j], m);
        }
        c += p[j + 1] * unit_phasor(turns);
    }
    return c;
}

namespace detail {

// Residual |b*x - a|: distance of b*x from the nearest integer candidate a,
// with the product split so large b does not eat the answer.
inline double convergent_residual(double x, const Rational& r) {
    const double qd = r.denominator().convert_to<double>();
    const double pd = r.numerator().convert_to<double>();
    const Product pr = two_product(x, qd);
    return std::abs((pr.value - pd) + pr.err);
}

struct ConvergentScan {
    std::optional<Rational> admitted;  // smallest-denominator convergent with residual <= tol
    std::optional<Rational> closest;   // last convergent examined under the cap (best residual)
};

// Walks the continued-fraction convergents of x with denominators <= qmax.
// |b*x - a| strictly decreases along convergents and convergents are optimal
// among all fractions of bounded denominator for this metric, so the first
// admitted convergent is the smallest-denominator solution and the last one
// examined is the best approximation under the cap.
inline ConvergentScan scan_convergents(double x, std::int64_t qmax, double tol) {
    ConvergentScan out;
    BigInt p_prev = 1, q_prev = 0;
    BigInt p_cur, q_cur;
    double y = x;
    for (int iter = 0; iter < 128; ++iter) {
        const double af = std::floor(y);
        if (std::abs(af) > 9.0e18) {
            break;  // partial quotient beyond any sane range
        }
        const BigInt a(static_cast<std::int64_t>(af));
        if (iter == 0) {
            p_cur = a;
            q_cur = 1;
        } else {
            const BigInt p_next = a * p_cur + p_prev;
            const BigInt q_next = a * q_cur + q_prev;
            p_prev = p_cur;
            q_prev = q_cur;
            p_cur = p_next;
            q_cur = q_next;
        }
        if (q_cur > qmax) {
            break;
        }
        const Rational conv(p_cur, q_cur);
        out.closest = conv;
        if (convergent_residual(x, conv) <= tol) {
            out.admitted = conv;
            break;
        }
        const double frac = y - af;
        if (frac < 1e-18) {
            break;  // x is (numerically) exactly this convergent
        }
        y = 1.0 / frac;
    }
    return out;
}

}  // namespace detail

// Smallest-denominator continued-fraction convergent a/b of x with b <= qmax
// whose residual |b*x - a| is <= tol; nullopt when no convergent qualifies.
inline std::optional<Rational> rational_reconstruct(double x, std::int64_t qmax, double tol) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument("rational_reconstruct: x must be finite");
    }
    if (qmax < 1) {
        throw std::invalid_argument("rational_reconstruct: qmax must be >= 1");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("rational_reconstruct: tol must be positive");
    }
    return detail::scan_convergents(x, qmax, tol).admitted;
}

// Classifies a phase vector as commensurate (all rational, with m0 = lcm of
// the reduced denominators) or incommensurate at the given qmax/tol.
// fundamental_frequency is left unset; callers that know beta or d0 fill it.
inline CommensurabilityReport classify_commensurability(const PhaseVector& alpha, std::int64_t qmax,
                                                        double tol) {
    if (alpha.size() == 0) {
        throw std::invalid_argument("classify_commensurability: alpha must be non-empty");
    }
    if (qmax < 1) {
        throw std::invalid_argument("classify_commensurability: qmax must be >= 1");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("classify_commensurability: tol must be positive");
    }
    CommensurabilityReport report;
    report.tolerance_used = tol;
    report.qmax_used = qmax;
    bool all_rational = true;
    std::vector<Rational> rationals;
    rationals.reserve(alpha.size());
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        const auto exact = alpha.exact_at(j);
        if (exact.has_value()) {
            report.convergents_examined.push_back({*exact, 0.0, true});
            rationals.push_back(*exact);
            continue;
        }
        const auto scan = detail::scan_convergents(alpha[j], qmax, tol);
        if (scan.admitted.has_value()) {
            report.convergents_examined.push_back(
                {*scan.admitted, detail::convergent_residual(alpha[j], *scan.admitted), true});
            rationals.push_back(*scan.admitted);
        } else {
            all_rational = false;
            if (scan.closest.has_value()) {
                report.convergents_examined.push_back(
                    {*scan.closest, detail::convergent_residual(alpha[j], *scan.closest), false});
            } else {
                report.convergents_examined.push_back({Rational(0), std::abs(alpha[j]), false});
            }
        }
    }
    if (all_rational) {
        report.classification = Commensurability::Rational;
        std::int64_t m0 = 1;
        for (const auto& r : rationals) {
            m0 = lcm_checked(BigInt(m0), r.denominator());
        }
        report.m0 = m0;
    } else {
        report.classification = Commensurability::IrrationalAtTolerance;
    }
    return report;
}

}  // namespace phaselab

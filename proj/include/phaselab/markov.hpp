#pragma once

/*
 * markov.hpp — the finite-state generalization, classification only.
 *
 * For Markov models the role of C_m^n is played by powers of the transition
 * matrix with entries weighted by complex exponentials:
 *
 *     source side:  W_kl(m) = p_kl e^{-2 pi i m log2 p_kl}
 *     medium side:  W_kl(m) = p_kl e^{ 2 pi i m d_kl / d_0}
 *
 * Every row of |W| sums to 1, so the spectral radius never exceeds unity;
 * the oscillatory/convergent dichotomy is decided by whether some harmonic
 * index m makes the spectral radius reach 1 (equivalently, on the medium
 * side, makes some eigenvalue equal 1).  A scan over m = 1..m_max reports
 * rho(m), the full eigenvalue sets, and both criteria; "exactly 1" is
 * rho >= 1 - eps with a caller-visible eps.
 *
 * Identical-rows matrices embed the memoryless case: the single nonzero
 * eigenvalue is e^{2 pi i m beta} C_m, so rho(m) = |C_m|.
 */

#include "phaselab/coherence.hpp"
#include "phaselab/errors.hpp"
#include "phaselab/fractional.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace phaselab {

// Row-stochastic matrix with strictly positive entries (logs must exist).
class TransitionMatrix {
  public:
    TransitionMatrix(std::size_t states, std::vector<double> entries)
        : states_(states), entries_(std::move(entries)) {
        if (states_ < 2) {
            throw std::invalid_argument("TransitionMatrix: need at least 2 states");
        }
        if (entries_.size() != states_ * states_) {
            throw std::invalid_argument("TransitionMatrix: entry count must be states^2");
        }
        for (std::size_t k = 0; k < states_; ++k) {
            double row = 0.0;
            for (std::size_t l = 0; l < states_; ++l) {
                const double p = (*this)(k, l);
                if (!(p > 0.0) || !std::isfinite(p)) {
                    throw std::invalid_argument("TransitionMatrix: entries must be positive");
                }
                row += p;
            }
            if (std::abs(row - 1.0) > 1e-12) {
                throw std::invalid_argument("TransitionMatrix: row " + std::to_string(k) +
                                            " does not sum to 1");
            }
        }
    }

    std::size_t states() const { return states_; }
    double operator()(std::size_t k, std::size_t l) const { return entries_[k * states_ + l]; }

  private:
    std::size_t states_;
    std::vector<double> entries_;
};

enum class WeightMode { SourceWeights, MediumWeights };

inline const char* to_string(WeightMode m) {
    return m == WeightMode::SourceWeights ? "source" : "medium";
}

// Distances d_kl and the reference d_0 for MediumWeights.
struct DistanceAux {
    std::size_t states = 0;
    std::vector<double> distances;  // row-major states x states
    double d0 = 1.0;
};

struct WeightedMatrix {
    std::size_t states = 0;
    std::vector<std::complex<double>> entries;  // row-major
    std::int64_t m = 0;
    WeightMode mode = WeightMode::SourceWeights;
    std::optional<DistanceAux> aux;

    std::complex<double> operator()(std::size_t k, std::size_t l) const {
        return entries[k * states + l];
    }
};

// Entry phases depend on the harmonic index m; |entry| always equals the
// transition probability.
inline WeightedMatrix weighted_matrix(const TransitionMatrix& P, std::int64_t m, WeightMode mode,
                                      const std::optional<DistanceAux>& aux = std::nullopt) {
    WeightedMatrix w;
    w.states = P.states();
    w.m = m;
    w.mode = mode;
    w.entries.resize(w.states * w.states);
    if (mode == WeightMode::MediumWeights) {
        if (!aux.has_value() || aux->states != P.states() ||
            aux->distances.size() != P.states() * P.states()) {
            throw std::invalid_argument("weighted_matrix: MediumWeights requires a full distance matrix");
        }
        if (aux->d0 == 0.0 || !std::isfinite(aux->d0)) {
            throw std::invalid_argument("weighted_matrix: reference d0 must be nonzero");
        }
        w.aux = aux;
    }
    for (std::size_t k = 0; k < w.states; ++k) {
        for (std::size_t l = 0; l < w.states; ++l) {
            const double p = P(k, l);
            double turns;
            if (mode == WeightMode::SourceWeights) {
                // e^{-2 pi i m log2 p}
                turns = fractional_part_of_product(std::log2(p), -m);
            } else {
                // e^{+2 pi i m d_kl / d0}
                turns = fractional_part_of_product(aux->distances[k * w.states + l] / aux->d0, m);
            }
            w.entries[k * w.states + l] = p * unit_phasor(turns);
        }
    }
    return w;
}

namespace detail {

inline Eigen::MatrixXcd to_eigen(const WeightedMatrix& w) {
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(w.states), static_cast<Eigen::Index>(w.states));
    for (std::size_t k = 0; k < w.states; ++k) {
        for (std::size_t l = 0; l < w.states; ++l) {
            m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = w(k, l);
        }
    }
    return m;
}

}  // namespace detail

// Full eigenvalue set of the weighted matrix (Schur-based solver).
inline std::vector<std::complex<double>> eigenvalues(const WeightedMatrix& w) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(detail::to_eigen(w), false);
    if (solver.info() != Eigen::Success) {
        throw numeric_error("eigenvalues: complex eigensolver did not converge");
    }
    const auto& ev = solver.eigenvalues();
    std::vector<std::complex<double>> out(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        out[static_cast<std::size_t>(i)] = ev(i);
    }
    return out;
}

// Largest eigenvalue modulus.
inline double spectral_radius(const WeightedMatrix& w) {
    double rho = 0.0;
    for (const auto& ev : eigenvalues(w)) {
        rho = std::max(rho, std::abs(ev));
    }
    return rho;
}

enum class MarkovClassification { Oscillatory, ConvergentUpToScan };

inline const char* to_string(MarkovClassification c) {
    return c == MarkovClassification::Oscillatory ? "Oscillatory" : "ConvergentUpToScan";
}

struct MarkovScanReport {
    WeightMode mode = WeightMode::SourceWeights;
    std::int64_t m_max = 0;
    double eps = 0.0;
    MarkovClassification classification = MarkovClassification::ConvergentUpToScan;
    std::vector<std::int64_t> flagged_m;            // {m : rho(m) >= 1 - eps}
    std::vector<std::int64_t> unit_eigenvalue_m;    // {m : some |lambda - 1| <= eps}
    std::vector<double> rho;                        // rho(m), m = 1..m_max
    std::vector<std::vector<std::complex<double>>> eigenvalue_sets;  // per m
};

// Scans m = 1..m_max; Oscillatory iff some rho(m) >= 1 - eps.  The set of m
// with an eigenvalue equal to 1 (within eps) is reported alongside, since
// the two sides of the analogy phrase the criterion differently.
inline MarkovScanReport classify_markov(const TransitionMatrix& P, WeightMode mode,
                                        const std::optional<DistanceAux>& aux, std::int64_t m_max,
                                        double eps) {
    if (m_max < 1) {
        throw std::invalid_argument("classify_markov: m_max must be >= 1");
    }
    if (!(eps > 0.0)) {
        throw std::invalid_argument("classify_markov: eps must be positive");
    }
    MarkovScanReport report;
    report.mode = mode;
    report.m_max = m_max;
    report.eps = eps;
    report.rho.reserve(static_cast<std::size_t>(m_max));
    report.eigenvalue_sets.reserve(static_cast<std::size_t>(m_max));
    for (std::int64_t m = 1; m <= m_max; ++m) {
        const WeightedMatrix w = weighted_matrix(P, m, mode, aux);
        auto evs = eigenvalues(w);
        double rho = 0.0;
        bool unit = false;
        for (const auto& ev : evs) {
            rho = std::max(rho, std::abs(ev));
            if (std::abs(ev - std::complex<double>(1.0, 0.0)) <= eps) {
                unit = true;
            }
        }
        report.rho.push_back(rho);
        report.eigenvalue_sets.push_back(std::move(evs));
        if (rho >= 1.0 - eps) {
            report.flagged_m.push_back(m);
        }
        if (unit) {
            report.unit_eigenvalue_m.push_back(m);
        }
    }
    report.classification = report.flagged_m.empty() ? MarkovClassification::ConvergentUpToScan
                                                     : MarkovClassification::Oscillatory;
    return report;
}

}  // namespace phaselab

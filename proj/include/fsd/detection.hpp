#pragma once

#include <span>
#include <vector>

#include "fsd/bigint.hpp"
#include "fsd/types.hpp"

namespace fsd::detect {

struct DispersionResult {
    std::vector<double> eigenvalues;  // descending, clipped at 0
    double dispersion = 0.0;          // product of eigenvalues above tolerance
    uint32_t rank_used = 0;
};

struct Threshold {
    double value = 0.0;
    double alpha_sq = 0.0;   // deviation measurement it was trained for
    uint32_t n = 0;          // samples per set
    double target_tpr = 0.0;
};

struct EvalCounts {
    uint64_t n_uu = 0;  // faulty sets flagged faulty
    uint64_t n_tu = 0;  // total faulty sets
    uint64_t n_nu = 0;  // normal sets flagged faulty
    uint64_t n_tn = 0;  // total normal sets

    double tpr() const { return n_tu ? static_cast<double>(n_uu) / n_tu : 0.0; }
    double fpr() const { return n_tn ? static_cast<double>(n_nu) / n_tn : 0.0; }
};

// Eigenvalues of a symmetric matrix, descending. Closed form up to 2x2,
// cyclic Jacobi rotations above. Rejects inputs asymmetric beyond
// 1e-9 * max|M|.
std::vector<double> eigen_sym(const Matrix& m);

// Product of eigenvalues above tau = 1e-9 * max(1, trace). A matrix with no
// eigenvalue above tolerance is perfectly concentrated: dispersion 0, rank 0.
DispersionResult dispersion(const Matrix& m);

// Multiplicative noise v -> v + floor(v * delta), delta ~ N(0, alpha_sq) per
// dimension, clamped back to [0, d] so packing range validity holds.
DataSample inject_deviation(const DataSample& sample, double alpha_sq, uint64_t d, Rng& rng);

// Exact scatter matrix of one set, computed from the centered-integer
// representation so that it matches the protocol's decoded matrix bit for bit.
Matrix scatter_matrix(const SampleSet& set);

// Marks inject_fraction of the sets, perturbs them at alpha_sq, and picks the
// largest threshold flagging at least target_tpr of the perturbed sets.
// Needs >= 100 sets; throws Errc::training when no positive threshold can
// reach the target.
Threshold train_threshold(std::span<const SampleSet> training_sets, uint64_t d,
                          double alpha_sq, double target_tpr, double inject_fraction,
                          Rng& rng);

// Same marking and injection, then counts flagged sets against the threshold.
// Rule: dispersion strictly above the threshold means flagged faulty.
EvalCounts evaluate(std::span<const SampleSet> testing_sets, uint64_t d,
                    const Threshold& threshold, double alpha_sq, double inject_fraction,
                    Rng& rng);

}  // namespace fsd::detect

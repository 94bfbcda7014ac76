#pragma once

#include <span>
#include <vector>

#include "fsd/bigint.hpp"
#include "fsd/types.hpp"

namespace fsd::packing {

// Superincreasing sequences a (length l, a1 = 1) and b (length n, b1 = 1).
// Each b_i exceeds 2nd times the sum of its predecessors; each a_i exceeds
// the full b-layer capacity times the sum of its predecessors. Together they
// let a single integer carry an l x n grid of bounded values.
struct SuperSeqs {
    std::vector<Int> a;
    std::vector<Int> b;
};

// Minimal sequences (tightest values satisfying the constraints, which
// maximizes how many samples fit under a given modulus). Throws
// CapacityError carrying the max feasible n when the packed bound would
// reach `modulus`.
SuperSeqs build_sequences(const SchemeDims& dims, const Int& modulus);

// Re-checks all three constraints by direct evaluation.
bool sequences_valid(const SuperSeqs& seqs, const SchemeDims& dims, const Int& modulus);

// Upper bound Sum_i a_i * Sum_k b_k * 2nd that must stay below the modulus.
Int packed_bound(const SuperSeqs& seqs, const SchemeDims& dims);

// Largest n for which build_sequences succeeds at the given modulus size.
// The optimistic bound treats the modulus as 2^bits - 1; strict mode uses
// 2^(bits-1), the smallest modulus of that bit length. Returns 0 when even
// n = 2 does not fit.
uint32_t max_samples(uint32_t l, uint64_t d, uint32_t modulus_bits, bool strict = false);
uint32_t max_samples_for_modulus(uint32_t l, uint64_t d, const Int& modulus);

// m = Sum_j a_j * v_j for one sample; range-checks every dimension.
Int encode_sample(const SuperSeqs& seqs, const SchemeDims& dims, const DataSample& sample);

// Plaintext exponent Sum_i a_i * d of the additive offset that keeps every
// per-sample bracket positive during decoding.
Int expected_offset(const SuperSeqs& seqs, const SchemeDims& dims);

// Decoded centered data and scatter representation.
//   u[j][i] = n*v_ji - Sum_k v_jk   (column sums are zero)
//   s = Sum_i u_i u_i^T             (exact, symmetric)
//   m = s / n^3                     (the real scatter matrix)
struct ScatterDecode {
    std::vector<std::vector<Int>> u;  // l x n
    std::vector<std::vector<Int>> s;  // l x l
    Matrix m;                         // l x l
};

// Peels the aggregate integer layer by layer: a-layer quotients first, then
// b-layer quotients per dimension, subtracting the n*d offset from each
// bracket. Range violations and leftover residue raise Errc::tamper.
ScatterDecode decode_aggregate(const SuperSeqs& seqs, const SchemeDims& dims, const Int& m_f);

// Same peeling with the offset omitted and validation disabled. Negative
// centered sums then alias large positive values, which corrupts the result;
// kept as a diagnostic of why the offset is required.
ScatterDecode decode_aggregate_no_offset(const SuperSeqs& seqs, const SchemeDims& dims,
                                         const Int& m_f);

// Plaintext-only reference of the aggregation exponent
// Sum_j a_j Sum_i b_i [n(v_ji + d) - Sum_k v_jk]; the homomorphic path must
// decrypt to exactly this value.
Int forward_aggregate_plain(const SuperSeqs& seqs, const SchemeDims& dims,
                            std::span<const DataSample> samples);

// Offset-free misencoding reduced into [0, modulus); pairs with
// decode_aggregate_no_offset in regression tests.
Int forward_aggregate_plain_no_offset(const SuperSeqs& seqs, const SchemeDims& dims,
                                      std::span<const DataSample> samples,
                                      const Int& modulus);

// Exact scatter computed straight from samples via the same centered-integer
// representation; the decode path must reproduce it bit for bit.
ScatterDecode scatter_from_samples(const SchemeDims& dims, std::span<const DataSample> samples);

}  // namespace fsd::packing

#include "fsd/packing.hpp"

#include <algorithm>

namespace fsd::packing {

namespace {

Int two_nd(const SchemeDims& dims) { return 2 * Int(dims.n) * Int(dims.d); }

// Packed bound for minimal sequences without materializing them.
Int minimal_bound(uint32_t l, uint64_t d, uint32_t n) {
    SchemeDims dims{l, n, d};
    Int step = two_nd(dims);
    Int b_prefix = 1;
    for (uint32_t i = 2; i <= n; ++i) b_prefix += b_prefix * step + 1;
    Int layer = b_prefix * step;
    Int a_prefix = 1;
    for (uint32_t i = 2; i <= l; ++i) a_prefix += a_prefix * layer + 1;
    return a_prefix * layer;
}

void check_sample(const SchemeDims& dims, const DataSample& sample) {
    if (sample.v.size() != dims.l)
        throw Error(Errc::argument, "sample has wrong dimension count");
    for (int64_t x : sample.v)
        if (x < 0 || static_cast<uint64_t>(x) > dims.d)
            throw Error(Errc::range, "sample value outside [0, d]");
}

std::vector<Int> column_sums(const SchemeDims& dims, std::span<const DataSample> samples) {
    std::vector<Int> sums(dims.l, 0);
    for (const auto& s : samples)
        for (uint32_t j = 0; j < dims.l; ++j) sums[j] += s.v[j];
    return sums;
}

ScatterDecode finish_scatter(std::vector<std::vector<Int>> u, const SchemeDims& dims) {
    ScatterDecode out;
    out.s.assign(dims.l, std::vector<Int>(dims.l, 0));
    for (uint32_t i = 0; i < dims.n; ++i)
        for (uint32_t j = 0; j < dims.l; ++j)
            for (uint32_t k = j; k < dims.l; ++k) out.s[j][k] += u[j][i] * u[k][i];
    for (uint32_t j = 0; j < dims.l; ++j)
        for (uint32_t k = 0; k < j; ++k) out.s[j][k] = out.s[k][j];

    double n_cubed = static_cast<double>(dims.n) * dims.n * dims.n;
    out.m.assign(dims.l, std::vector<double>(dims.l, 0.0));
    for (uint32_t j = 0; j < dims.l; ++j)
        for (uint32_t k = 0; k < dims.l; ++k)
            out.m[j][k] = out.s[j][k].get_d() / n_cubed;
    out.u = std::move(u);
    return out;
}

// Layer-by-layer peel shared by the checked and the offset-free decoders.
ScatterDecode peel(const SuperSeqs& seqs, const SchemeDims& dims, const Int& m_f,
                   const Int& bracket_offset, bool validate) {
    if (sgn(m_f) < 0) throw Error(Errc::tamper, "aggregate value is negative");
    if (validate && m_f >= packed_bound(seqs, dims))
        throw Error(Errc::tamper, "aggregate exceeds the packed bound");

    Int bracket_cap = two_nd(dims);
    std::vector<Int> t_a(dims.l);
    Int x = m_f;
    for (uint32_t j = dims.l; j >= 2; --j) {
        Int rem = x % seqs.a[j - 1];
        t_a[j - 1] = (x - rem) / seqs.a[j - 1];
        x = rem;
    }
    t_a[0] = x;

    std::vector<std::vector<Int>> u(dims.l, std::vector<Int>(dims.n));
    for (uint32_t j = 0; j < dims.l; ++j) {
        Int y = t_a[j];
        Int col_sum = 0;
        for (uint32_t i = dims.n; i >= 2; --i) {
            Int rem = y % seqs.b[i - 1];
            Int bracket = (y - rem) / seqs.b[i - 1];
            if (validate && (sgn(bracket) <= 0 || bracket > bracket_cap))
                throw Error(Errc::tamper, "decoded bracket outside (0, 2nd]");
            u[j][i - 1] = bracket - bracket_offset;
            col_sum += u[j][i - 1];
            y = rem;
        }
        if (validate && (sgn(y) <= 0 || y > bracket_cap))
            throw Error(Errc::tamper, "decoded bracket outside (0, 2nd]");
        u[j][0] = y - bracket_offset;
        col_sum += u[j][0];

        if (validate) {
            Int nd = Int(dims.n) * Int(dims.d);
            for (const Int& e : u[j])
                if (e < -nd || e > nd)
                    throw Error(Errc::tamper, "centered value outside [-nd, nd]");
            if (sgn(col_sum) != 0)
                throw Error(Errc::tamper, "centered values do not sum to zero");
        }
    }
    return finish_scatter(std::move(u), dims);
}

}  // namespace

SuperSeqs build_sequences(const SchemeDims& dims, const Int& modulus) {
    dims.validate();
    if (modulus < 2) throw Error(Errc::argument, "modulus must be >= 2");

    Int step = two_nd(dims);
    SuperSeqs seqs;
    seqs.b.reserve(dims.n);
    seqs.b.push_back(1);
    Int b_prefix = 1;
    for (uint32_t i = 2; i <= dims.n; ++i) {
        seqs.b.push_back(b_prefix * step + 1);
        b_prefix += seqs.b.back();
    }

    Int layer = b_prefix * step;
    seqs.a.reserve(dims.l);
    seqs.a.push_back(1);
    Int a_prefix = 1;
    for (uint32_t i = 2; i <= dims.l; ++i) {
        seqs.a.push_back(a_prefix * layer + 1);
        a_prefix += seqs.a.back();
    }

    if (a_prefix * layer >= modulus)
        throw CapacityError("packed bound reaches the modulus; reduce n, l or d",
                            max_samples_for_modulus(dims.l, dims.d, modulus));
    return seqs;
}

bool sequences_valid(const SuperSeqs& seqs, const SchemeDims& dims, const Int& modulus) {
    if (seqs.a.size() != dims.l || seqs.b.size() != dims.n) return false;
    if (seqs.a[0] != 1 || seqs.b[0] != 1) return false;

    Int step = two_nd(dims);
    Int b_prefix = 0;
    for (uint32_t i = 0; i < dims.n; ++i) {
        if (i >= 1 && b_prefix * step >= seqs.b[i]) return false;
        b_prefix += seqs.b[i];
    }
    Int layer = b_prefix * step;
    Int a_prefix = 0;
    for (uint32_t i = 0; i < dims.l; ++i) {
        if (i >= 1 && a_prefix * layer >= seqs.a[i]) return false;
        a_prefix += seqs.a[i];
    }
    return a_prefix * layer < modulus;
}

Int packed_bound(const SuperSeqs& seqs, const SchemeDims& dims) {
    Int sum_a = 0, sum_b = 0;
    for (const Int& a : seqs.a) sum_a += a;
    for (const Int& b : seqs.b) sum_b += b;
    return sum_a * sum_b * two_nd(dims);
}

uint32_t max_samples_for_modulus(uint32_t l, uint64_t d, const Int& modulus) {
    auto fits = [&](uint32_t n) { return minimal_bound(l, d, n) < modulus; };
    if (!fits(2)) return 0;
    uint32_t lo = 2, hi = 4;
    constexpr uint32_t kCap = 1u << 24;
    while (hi < kCap && fits(hi)) {
        lo = hi;
        hi *= 2;
    }
    // invariant: fits(lo), !fits(hi)
    while (hi - lo > 1) {
        uint32_t mid = lo + (hi - lo) / 2;
        (fits(mid) ? lo : hi) = mid;
    }
    return lo;
}

uint32_t max_samples(uint32_t l, uint64_t d, uint32_t modulus_bits, bool strict) {
    if (l < 1 || d < 1 || modulus_bits < 2)
        throw Error(Errc::argument, "invalid capacity query");
    Int bound = strict ? pow2(modulus_bits - 1) : pow2(modulus_bits) - 1;
    return max_samples_for_modulus(l, d, bound);
}

Int encode_sample(const SuperSeqs& seqs, const SchemeDims& dims, const DataSample& sample) {
    check_sample(dims, sample);
    Int m = 0;
    for (uint32_t j = 0; j < dims.l; ++j) m += seqs.a[j] * Int(sample.v[j]);
    return m;
}

Int expected_offset(const SuperSeqs& seqs, const SchemeDims& dims) {
    Int sum = 0;
    for (const Int& a : seqs.a) sum += a;
    return sum * Int(dims.d);
}

ScatterDecode decode_aggregate(const SuperSeqs& seqs, const SchemeDims& dims, const Int& m_f) {
    return peel(seqs, dims, m_f, Int(dims.n) * Int(dims.d), true);
}

ScatterDecode decode_aggregate_no_offset(const SuperSeqs& seqs, const SchemeDims& dims,
                                         const Int& m_f) {
    return peel(seqs, dims, m_f, 0, false);
}

Int forward_aggregate_plain(const SuperSeqs& seqs, const SchemeDims& dims,
                            std::span<const DataSample> samples) {
    if (samples.size() != dims.n)
        throw Error(Errc::argument, "aggregation needs exactly n samples");
    for (const auto& s : samples) check_sample(dims, s);

    auto sums = column_sums(dims, samples);
    Int nd = Int(dims.n) * Int(dims.d);
    Int total = 0;
    for (uint32_t j = 0; j < dims.l; ++j) {
        Int inner = 0;
        for (uint32_t i = 0; i < dims.n; ++i)
            inner += seqs.b[i] * (Int(dims.n) * Int(samples[i].v[j]) + nd - sums[j]);
        total += seqs.a[j] * inner;
    }
    return total;
}

Int forward_aggregate_plain_no_offset(const SuperSeqs& seqs, const SchemeDims& dims,
                                      std::span<const DataSample> samples,
                                      const Int& modulus) {
    if (samples.size() != dims.n)
        throw Error(Errc::argument, "aggregation needs exactly n samples");
    for (const auto& s : samples) check_sample(dims, s);

    auto sums = column_sums(dims, samples);
    Int total = 0;
    for (uint32_t j = 0; j < dims.l; ++j) {
        Int inner = 0;
        for (uint32_t i = 0; i < dims.n; ++i)
            inner += seqs.b[i] * (Int(dims.n) * Int(samples[i].v[j]) - sums[j]);
        total += seqs.a[j] * inner;
    }
    Int reduced = total % modulus;
    if (sgn(reduced) < 0) reduced += modulus;
    return reduced;
}

ScatterDecode scatter_from_samples(const SchemeDims& dims, std::span<const DataSample> samples) {
    if (samples.size() != dims.n)
        throw Error(Errc::argument, "scatter needs exactly n samples");
    for (const auto& s : samples)
        if (s.v.size() != dims.l)
            throw Error(Errc::argument, "sample has wrong dimension count");

    auto sums = column_sums(dims, samples);
    std::vector<std::vector<Int>> u(dims.l, std::vector<Int>(dims.n));
    for (uint32_t j = 0; j < dims.l; ++j)
        for (uint32_t i = 0; i < dims.n; ++i)
            u[j][i] = Int(dims.n) * Int(samples[i].v[j]) - sums[j];
    return finish_scatter(std::move(u), dims);
}

}  // namespace fsd::packing

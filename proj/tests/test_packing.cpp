#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "fsd/packing.hpp"

using namespace fsd;
using namespace fsd::packing;

namespace {

bool throws_code(Errc want, const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code() == want;
    }
    return false;
}

// Greedy knapsack decode, independent of encode_sample's construction.
std::vector<int64_t> greedy_decode(const SuperSeqs& seqs, Int m) {
    std::vector<int64_t> out(seqs.a.size());
    for (size_t j = seqs.a.size(); j >= 1; --j) {
        Int q = m / seqs.a[j - 1];
        out[j - 1] = static_cast<int64_t>(q.get_si());
        m -= seqs.a[j - 1] * q;
    }
    return out;
}

// Direct centered-scatter computation in integers, written from the
// definition rather than shared library code.
std::vector<std::vector<Int>> oracle_scatter(const SchemeDims& dims,
                                             const std::vector<DataSample>& samples) {
    std::vector<Int> sums(dims.l, 0);
    for (const auto& s : samples)
        for (uint32_t j = 0; j < dims.l; ++j) sums[j] += s.v[j];
    std::vector<std::vector<Int>> s_mat(dims.l, std::vector<Int>(dims.l, 0));
    for (uint32_t i = 0; i < dims.n; ++i)
        for (uint32_t j = 0; j < dims.l; ++j)
            for (uint32_t k = 0; k < dims.l; ++k) {
                Int uj = Int(dims.n) * Int(samples[i].v[j]) - sums[j];
                Int uk = Int(dims.n) * Int(samples[i].v[k]) - sums[k];
                s_mat[j][k] += uj * uk;
            }
    return s_mat;
}

std::vector<DataSample> random_samples(const SchemeDims& dims, Rng& rng) {
    std::vector<DataSample> out(dims.n);
    for (auto& s : out) {
        s.v.resize(dims.l);
        for (auto& v : s.v) v = static_cast<int64_t>(rng.u64_below(dims.d + 1));
    }
    return out;
}

}  // namespace

TEST_CASE("minimal sequences match hand-computed fixtures") {
    Int modulus = pow2(64);
    SchemeDims dims{2, 2, 3};
    auto seqs = build_sequences(dims, modulus);
    REQUIRE(seqs.b.size() == 2);
    REQUIRE(seqs.a.size() == 2);
    CHECK(seqs.b[0] == 1);
    CHECK(seqs.b[1] == 13);   // 1 * 2*2*3 + 1
    CHECK(seqs.a[0] == 1);
    CHECK(seqs.a[1] == 169);  // (1+13) * 12 + 1
    CHECK(sequences_valid(seqs, dims, modulus));

    SchemeDims dims2{1, 2, 1};
    auto seqs2 = build_sequences(dims2, modulus);
    CHECK(seqs2.a == std::vector<Int>{1});
    CHECK(seqs2.b == std::vector<Int>{Int(1), Int(5)});
    CHECK(sequences_valid(seqs2, dims2, modulus));
}

TEST_CASE("sequence validity is checked by direct evaluation") {
    Int modulus = pow2(64);
    SchemeDims dims{2, 3, 2};
    auto seqs = build_sequences(dims, modulus);
    CHECK(sequences_valid(seqs, dims, modulus));

    auto broken = seqs;
    broken.b[2] -= 1;  // violates the b constraint
    CHECK_FALSE(sequences_valid(broken, dims, modulus));
    auto wrong_start = seqs;
    wrong_start.a[0] = 2;
    CHECK_FALSE(sequences_valid(wrong_start, dims, modulus));
    CHECK_FALSE(sequences_valid(seqs, dims, Int(10)));  // capacity violated
}

TEST_CASE("capacity failure reports the max feasible n") {
    SchemeDims dims{20, 200, 1 << 16};
    Int modulus = pow2(2048) - 1;
    try {
        build_sequences(dims, modulus);
        FAIL("expected capacity error");
    } catch (const CapacityError& e) {
        uint32_t n_max = e.max_feasible_n();
        CHECK(n_max >= 2);
        CHECK(n_max < 200);
        // the reported bound is sharp: n_max fits, n_max + 1 does not
        SchemeDims ok{20, n_max, 1 << 16};
        CHECK_NOTHROW(build_sequences(ok, modulus));
        SchemeDims over{20, n_max + 1, 1 << 16};
        CHECK(throws_code(Errc::capacity, [&] { build_sequences(over, modulus); }));
    }
}

TEST_CASE("max_samples is monotone and favors larger moduli") {
    uint32_t base = max_samples(2, 100, 2048);
    CHECK(base >= 2);
    CHECK(max_samples(3, 100, 2048) <= base);
    CHECK(max_samples(5, 100, 2048) <= max_samples(3, 100, 2048));
    CHECK(max_samples(2, 1000, 2048) <= base);
    CHECK(max_samples(2, 100, 4096) > base);
    // strict mode can only shrink the answer
    CHECK(max_samples(2, 100, 2048, true) <= base);
}

TEST_CASE("encode_sample packs dimensions onto the a sequence") {
    Int modulus = pow2(64);
    SchemeDims dims{2, 2, 3};
    auto seqs = build_sequences(dims, modulus);

    CHECK(encode_sample(seqs, dims, {{0, 0}}) == 0);
    CHECK(encode_sample(seqs, dims, {{3, 2}}) == 341);  // 3 + 2*169

    CHECK(throws_code(Errc::range, [&] { encode_sample(seqs, dims, {{4, 0}}); }));
    CHECK(throws_code(Errc::range, [&] { encode_sample(seqs, dims, {{-1, 0}}); }));
    CHECK(throws_code(Errc::argument, [&] { encode_sample(seqs, dims, {{1}}); }));
}

TEST_CASE("greedy decode recovers any in-range sample from its encoding") {
    SeededRng rng(21);
    Int modulus = pow2(512);
    for (uint32_t l : {1u, 3u, 5u}) {
        SchemeDims dims{l, 4, 255};
        auto seqs = build_sequences(dims, modulus);
        for (int trial = 0; trial < 50; ++trial) {
            DataSample s;
            s.v.resize(l);
            for (auto& v : s.v) v = static_cast<int64_t>(rng.u64_below(256));
            CHECK(greedy_decode(seqs, encode_sample(seqs, dims, s)) == s.v);
        }
    }
}

TEST_CASE("expected offset and bracket positivity") {
    Int modulus = pow2(64);
    SchemeDims one{1, 2, 5};
    CHECK(expected_offset(build_sequences(one, modulus), one) == 5);

    SchemeDims dims{2, 2, 3};
    auto seqs = build_sequences(dims, modulus);
    CHECK(expected_offset(seqs, dims) == 510);  // (1 + 169) * 3

    // n*(v + d) - sum_k v_k stays within (0, 2nd] for all in-range data
    SeededRng rng(22);
    SchemeDims big{1, 8, 9};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int64_t> v(big.n);
        int64_t sum = 0;
        for (auto& x : v) {
            x = static_cast<int64_t>(rng.u64_below(big.d + 1));
            sum += x;
        }
        for (int64_t x : v) {
            int64_t bracket =
                static_cast<int64_t>(big.n) * (x + static_cast<int64_t>(big.d)) - sum;
            CHECK(bracket > 0);
            CHECK(bracket <= 2 * static_cast<int64_t>(big.n) * static_cast<int64_t>(big.d));
        }
    }
}

TEST_CASE("decode recovers the hand-worked two-sample example") {
    Int modulus = pow2(64);
    SchemeDims dims{2, 2, 3};
    auto seqs = build_sequences(dims, modulus);
    std::vector<DataSample> samples{{{3, 2}}, {{1, 0}}};

    Int m_f = forward_aggregate_plain(seqs, dims, samples);
    auto dec = decode_aggregate(seqs, dims, m_f);

    CHECK(dec.u[0][0] == 2);
    CHECK(dec.u[0][1] == -2);
    CHECK(dec.u[1][0] == 2);
    CHECK(dec.u[1][1] == -2);
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            CHECK(dec.s[j][k] == 8);
            CHECK(dec.m[j][k] == 1.0);
        }
}

TEST_CASE("identical samples decode to a zero scatter") {
    Int modulus = pow2(128);
    SchemeDims dims{3, 4, 7};
    auto seqs = build_sequences(dims, modulus);
    std::vector<DataSample> samples(4, DataSample{{5, 0, 7}});
    auto dec = decode_aggregate(seqs, dims, forward_aggregate_plain(seqs, dims, samples));
    for (const auto& row : dec.u)
        for (const auto& v : row) CHECK(v == 0);
    for (const auto& row : dec.s)
        for (const auto& v : row) CHECK(v == 0);
}

TEST_CASE("decode(forward) reproduces the direct scatter exactly") {
    SeededRng rng(23);
    Int modulus = pow2(4096);
    int cases = 0;
    for (uint32_t l : {1u, 2u, 3u, 5u}) {
        for (uint32_t n : {2u, 5u, 10u, 25u}) {
            for (uint64_t d : {uint64_t(1), uint64_t(255), uint64_t(4095)}) {
                SchemeDims dims{l, n, d};
                SuperSeqs seqs;
                try {
                    seqs = build_sequences(dims, modulus);
                } catch (const CapacityError&) {
                    continue;
                }
                for (int trial = 0; trial < 3; ++trial) {
                    auto samples = random_samples(dims, rng);
                    auto dec = decode_aggregate(seqs, dims,
                                                forward_aggregate_plain(seqs, dims, samples));
                    auto want = oracle_scatter(dims, samples);
                    CHECK(dec.s == want);
                    for (uint32_t j = 0; j < l; ++j) {
                        Int col = 0, sum = 0;
                        for (uint32_t k = 0; k < n; ++k) sum += samples[k].v[j];
                        for (uint32_t i = 0; i < n; ++i) {
                            CHECK(dec.u[j][i] == Int(n) * Int(samples[i].v[j]) - sum);
                            col += dec.u[j][i];
                        }
                        CHECK(col == 0);
                    }
                    ++cases;
                }
            }
        }
    }
    CHECK(cases >= 100);
}

TEST_CASE("direct scatter matches the decode route from samples") {
    SeededRng rng(24);
    SchemeDims dims{2, 6, 100};
    auto samples = random_samples(dims, rng);
    auto direct = scatter_from_samples(dims, samples);
    CHECK(direct.s == oracle_scatter(dims, samples));
}

TEST_CASE("omitting the positivity offset corrupts negative centered sums") {
    // worst case from the decoding analysis: last dimension reads d
    // everywhere except a zero in the final sample
    Int modulus = pow2(256);
    SchemeDims dims{2, 5, 3};
    auto seqs = build_sequences(dims, modulus);
    std::vector<DataSample> samples(5);
    for (uint32_t i = 0; i < 5; ++i) samples[i].v = {2, 3};
    samples[4].v[1] = 0;

    // true centered value of the last (dimension, sample) cell is negative
    Int true_u = Int(5) * 0 - Int(4 * 3);
    CHECK(true_u < 0);

    Int m_no = forward_aggregate_plain_no_offset(seqs, dims, samples, modulus);
    auto corrupted = decode_aggregate_no_offset(seqs, dims, m_no);
    CHECK(corrupted.u[1][4] >= 0);  // wrapped into a large non-negative value
    CHECK(corrupted.u[1][4] != true_u);

    auto good = decode_aggregate(seqs, dims, forward_aggregate_plain(seqs, dims, samples));
    CHECK(good.u[1][4] == true_u);
}

TEST_CASE("forward aggregate closed forms") {
    Int modulus = pow2(128);
    SchemeDims dims{2, 3, 4};
    auto seqs = build_sequences(dims, modulus);

    std::vector<DataSample> zeros(3, DataSample{{0, 0}});
    Int sum_b = seqs.b[0] + seqs.b[1] + seqs.b[2];
    Int want = (seqs.a[0] + seqs.a[1]) * sum_b * Int(3) * Int(4);
    CHECK(forward_aggregate_plain(seqs, dims, zeros) == want);

    std::vector<DataSample> two(2, DataSample{{0, 0}});
    CHECK(throws_code(Errc::argument, [&] { forward_aggregate_plain(seqs, dims, two); }));

    // single dimension reduces to the b-layer sum alone
    SchemeDims one{1, 3, 4};
    auto seqs1 = build_sequences(one, modulus);
    std::vector<DataSample> s1{{{1}}, {{4}}, {{0}}};
    Int total = 0;
    for (int i = 0; i < 3; ++i)
        total += seqs1.b[i] * (Int(3) * Int(s1[i].v[0]) + Int(12) - Int(5));
    CHECK(forward_aggregate_plain(seqs1, one, s1) == total);
}

TEST_CASE("decode_aggregate raises the tamper alarm on corrupted aggregates") {
    Int modulus = pow2(128);
    SchemeDims dims{2, 3, 4};
    auto seqs = build_sequences(dims, modulus);
    SeededRng rng(25);
    auto samples = random_samples(dims, rng);
    Int m_f = forward_aggregate_plain(seqs, dims, samples);

    CHECK_NOTHROW(decode_aggregate(seqs, dims, m_f));
    CHECK(throws_code(Errc::tamper, [&] { decode_aggregate(seqs, dims, m_f + 1); }));
    CHECK(throws_code(Errc::tamper, [&] { decode_aggregate(seqs, dims, Int(-1)); }));
    CHECK(throws_code(Errc::tamper,
                      [&] { decode_aggregate(seqs, dims, packed_bound(seqs, dims)); }));
}

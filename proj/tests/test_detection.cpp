#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "fsd/detection.hpp"

using namespace fsd;
using namespace fsd::detect;

namespace {

bool throws_code(Errc want, const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code() == want;
    }
    return false;
}

// Rng whose gaussian draws are pinned to a constant.
class FixedNormalRng final : public Rng {
public:
    explicit FixedNormalRng(double value, uint64_t seed = 1) : value_(value), inner_(seed) {}
    void fill(void* buf, size_t len) override { inner_.fill(buf, len); }
    double normal(double, double) override { return value_; }

private:
    double value_;
    SeededRng inner_;
};

// Closed-form eigenvalues of a symmetric 3x3 via the trigonometric method,
// as an oracle for the rotation-based path.
std::vector<double> eigen3_closed_form(const Matrix& a) {
    double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    double p2 = 0;
    for (int i = 0; i < 3; ++i) p2 += (a[i][i] - q) * (a[i][i] - q);
    p2 += 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    if (p == 0) return {q, q, q};
    Matrix b(3, std::vector<double>(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
    double detb = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                  b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                  b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    double r = std::clamp(detb / 2.0, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    double e1 = q + 2.0 * p * std::cos(phi);
    double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    double e2 = 3.0 * q - e1 - e3;
    return {e1, e2, e3};
}

SampleSet constant_set(uint32_t n, std::vector<int64_t> v) {
    return SampleSet(n, DataSample{std::move(v)});
}

}  // namespace

TEST_CASE("eigenvalues of small fixtures") {
    CHECK(eigen_sym({{1, 0}, {0, 1}}) == std::vector<double>{1, 1});
    auto ev = eigen_sym({{1, 1}, {1, 1}});
    CHECK(ev[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(0.0).epsilon(1e-12));
    auto dg = eigen_sym({{3, 0}, {0, 4}});
    CHECK(dg[0] == 4);
    CHECK(dg[1] == 3);
    CHECK(eigen_sym({{7}}) == std::vector<double>{7});
}

TEST_CASE("asymmetric input is rejected") {
    CHECK(throws_code(Errc::argument, [] { eigen_sym({{1, 2}, {1, 1}}); }));
    CHECK(throws_code(Errc::argument, [] { eigen_sym({{1, 2}, {1, 2}, {3, 4}}); }));
    CHECK(throws_code(Errc::argument, [] { eigen_sym({}); }));
}

TEST_CASE("eigenvalue sum matches the trace on random PSD matrices") {
    SeededRng rng(31);
    for (size_t l : {size_t(3), size_t(4), size_t(5)}) {
        for (int trial = 0; trial < 20; ++trial) {
            // M = A A^T is PSD
            Matrix a(l, std::vector<double>(l));
            for (auto& row : a)
                for (auto& v : row)
                    v = static_cast<double>(rng.u64_below(2000)) / 100.0 - 10.0;
            Matrix m(l, std::vector<double>(l, 0.0));
            for (size_t i = 0; i < l; ++i)
                for (size_t j = 0; j < l; ++j)
                    for (size_t k = 0; k < l; ++k) m[i][j] += a[i][k] * a[j][k];
            auto ev = eigen_sym(m);
            double trace = 0, sum = 0;
            for (size_t i = 0; i < l; ++i) trace += m[i][i];
            for (double v : ev) {
                sum += v;
                CHECK(v >= -1e-9 * std::max(1.0, trace));
            }
            CHECK(sum == doctest::Approx(trace).epsilon(1e-9));
            CHECK(std::is_sorted(ev.rbegin(), ev.rend()));
        }
    }
}

TEST_CASE("rotation path agrees with the 3x3 closed form") {
    SeededRng rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix m(3, std::vector<double>(3));
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j)
                m[i][j] = m[j][i] = static_cast<double>(rng.u64_below(4000)) / 100.0 - 20.0;
        auto got = eigen_sym(m);
        auto want = eigen3_closed_form(m);
        std::sort(want.rbegin(), want.rend());
        for (int i = 0; i < 3; ++i) {
            double scale = std::max(1.0, std::fabs(want[i]));
            CHECK(std::fabs(got[i] - want[i]) / scale < 1e-8);
        }
    }
}

TEST_CASE("dispersion fixtures") {
    auto zero = dispersion({{0, 0}, {0, 0}});
    CHECK(zero.dispersion == 0);
    CHECK(zero.rank_used == 0);

    auto rank1 = dispersion({{1, 1}, {1, 1}});
    CHECK(rank1.dispersion == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rank1.rank_used == 1);

    auto full = dispersion({{3, 0}, {0, 4}});
    CHECK(full.dispersion == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(full.rank_used == 2);

    // reported eigenvalues are clipped at zero
    for (double v : rank1.eigenvalues) CHECK(v >= 0);
}

TEST_CASE("dispersion scales as c^rank for well-separated spectra") {
    Matrix m{{5, 1}, {1, 3}};
    auto base = dispersion(m);
    for (double c : {2.0, 7.5, 100.0}) {
        Matrix scaled(2, std::vector<double>(2));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) scaled[i][j] = c * m[i][j];
        auto got = dispersion(scaled);
        CHECK(got.rank_used == base.rank_used);
        double want = std::pow(c, base.rank_used) * base.dispersion;
        CHECK(got.dispersion == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("deviation injection") {
    DataSample s{{100, 0, 4000}};

    SUBCASE("zero deviation leaves the sample unchanged") {
        FixedNormalRng rng(0.0);
        CHECK(inject_deviation(s, 0.05, 4095, rng) == s);
    }
    SUBCASE("zero values are fixed points of the multiplicative model") {
        SeededRng rng(33);
        DataSample zeros{{0, 0}};
        for (int i = 0; i < 50; ++i)
            CHECK(inject_deviation(zeros, 0.10, 4095, rng) == zeros);
    }
    SUBCASE("results are clamped into range") {
        FixedNormalRng up(10.0);
        auto hi = inject_deviation(s, 0.05, 4095, up);
        CHECK(hi.v[0] == 1100);  // 100 + floor(100 * 10)
        CHECK(hi.v[2] == 4095);  // clamped at d
        FixedNormalRng down(-10.0);
        auto lo = inject_deviation(s, 0.05, 4095, down);
        CHECK(lo.v[0] == 0);
        CHECK(lo.v[2] == 0);
    }
    SUBCASE("alpha_sq must be positive") {
        SeededRng rng(34);
        CHECK(throws_code(Errc::argument, [&] { inject_deviation(s, 0.0, 4095, rng); }));
    }
}

TEST_CASE("empirical deviation matches the requested variance") {
    SeededRng rng(35);
    const double alpha_sq = 0.05;
    const int64_t v = 10000;
    const uint64_t d = 1000000;
    DataSample s{{v}};
    double sum = 0, sum_sq = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        auto out = inject_deviation(s, alpha_sq, d, rng);
        double rel = static_cast<double>(out.v[0] - v) / static_cast<double>(v);
        sum += rel;
        sum_sq += rel * rel;
    }
    double mean = sum / trials;
    double stddev = std::sqrt(sum_sq / trials - mean * mean);
    CHECK(stddev == doctest::Approx(std::sqrt(alpha_sq)).epsilon(0.05));
}

TEST_CASE("scatter matrix of a concrete set") {
    // two samples (3,2) and (1,0): both dimensions have variance 1 and full
    // correlation
    Matrix m = scatter_matrix({{{3, 2}}, {{1, 0}}});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(m[i][j] == 1.0);

    Matrix one = scatter_matrix({{{0}}, {{2}}});
    CHECK(one[0][0] == 1.0);
}

TEST_CASE("training selects a threshold meeting the target rate") {
    // clean sets are constant; injected copies become noisy, so the two
    // dispersion populations are fully separated
    std::vector<SampleSet> sets(400, constant_set(10, {2000, 1000}));

    SeededRng rng(37);
    auto th = train_threshold(sets, 4095, 0.05, 0.95, 0.2, rng);
    CHECK(th.value > 0);
    CHECK(th.alpha_sq == 0.05);
    CHECK(th.n == 10);

    SeededRng eval_rng(38);
    auto counts = evaluate(sets, 4095, th, 0.05, 0.2, eval_rng);
    CHECK(counts.n_tu == 80);
    CHECK(counts.n_tn == 320);
    CHECK(counts.tpr() >= 0.90);
    CHECK(counts.fpr() == 0.0);  // clean sets have zero dispersion
}

TEST_CASE("identical injected dispersions put the threshold just below them") {
    std::vector<SampleSet> sets(200, constant_set(5, {1000}));
    FixedNormalRng rng(0.5, 39);  // every injection scales by the same factor
    auto th = train_threshold(sets, 4095, 0.05, 0.95, 0.2, rng);
    CHECK(th.value > 0);

    FixedNormalRng eval_rng(0.5, 40);
    auto counts = evaluate(sets, 4095, th, 0.05, 0.2, eval_rng);
    CHECK(counts.tpr() == 1.0);
}

TEST_CASE("training failure when injected dispersions are all zero") {
    std::vector<SampleSet> sets(150, constant_set(5, {1000}));
    FixedNormalRng rng(0.0, 41);  // injection changes nothing
    CHECK(throws_code(Errc::training,
                      [&] { train_threshold(sets, 4095, 0.05, 0.95, 0.2, rng); }));
}

TEST_CASE("training input validation") {
    std::vector<SampleSet> few(99, constant_set(5, {1}));
    SeededRng rng(42);
    CHECK(throws_code(Errc::argument,
                      [&] { train_threshold(few, 4095, 0.05, 0.95, 0.2, rng); }));
    std::vector<SampleSet> sets(100, constant_set(5, {1}));
    CHECK(throws_code(Errc::argument,
                      [&] { train_threshold(sets, 4095, 0.05, 1.5, 0.2, rng); }));
    CHECK(throws_code(Errc::argument,
                      [&] { train_threshold(sets, 4095, 0.05, 0.95, 0.0, rng); }));
}

TEST_CASE("degenerate thresholds in evaluation") {
    SeededRng data_rng(43);
    // noisy sets: every dispersion is positive
    std::vector<SampleSet> sets;
    for (int i = 0; i < 200; ++i) {
        SampleSet set;
        for (int k = 0; k < 8; ++k) {
            DataSample s{{static_cast<int64_t>(1000 + data_rng.u64_below(50)),
                          static_cast<int64_t>(2000 + data_rng.u64_below(50))}};
            set.push_back(s);
        }
        sets.push_back(set);
    }

    SeededRng rng1(44);
    auto inf = evaluate(sets, 4095, {std::numeric_limits<double>::infinity(), 0, 8, 0},
                        0.05, 0.2, rng1);
    CHECK(inf.tpr() == 0.0);
    CHECK(inf.fpr() == 0.0);

    SeededRng rng2(45);
    auto zero = evaluate(sets, 4095, {0.0, 0, 8, 0}, 0.05, 0.2, rng2);
    CHECK(zero.tpr() == 1.0);
    CHECK(zero.fpr() == 1.0);
}

TEST_CASE("tpr rises with the injected deviation on a fixed threshold") {
    SeededRng data_rng(46);
    std::vector<SampleSet> sets;
    for (int i = 0; i < 300; ++i) {
        SampleSet set;
        for (int k = 0; k < 10; ++k)
            set.push_back(DataSample{{static_cast<int64_t>(1500 + data_rng.u64_below(8)),
                                      static_cast<int64_t>(900 + data_rng.u64_below(8))}});
        sets.push_back(set);
    }
    SeededRng train_rng(47);
    auto th = train_threshold(sets, 4095, 0.05, 0.95, 0.2, train_rng);

    SeededRng r1(48), r2(49);
    auto low = evaluate(sets, 4095, th, 0.01, 0.2, r1);
    auto high = evaluate(sets, 4095, th, 0.20, 0.2, r2);
    CHECK(high.tpr() >= low.tpr());
    CHECK(high.tpr() >= 0.95);
}

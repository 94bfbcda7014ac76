#include "fsd/detection.hpp"

#include <algorithm>
#include <cmath>

#include "fsd/packing.hpp"

namespace fsd::detect {

namespace {

void check_square(const Matrix& m) {
    if (m.empty()) throw Error(Errc::argument, "empty matrix");
    for (const auto& row : m)
        if (row.size() != m.size()) throw Error(Errc::argument, "matrix is not square");
}

double max_abs(const Matrix& m) {
    double v = 0;
    for (const auto& row : m)
        for (double x : row) v = std::max(v, std::fabs(x));
    return v;
}

double frobenius(const Matrix& m) {
    double s = 0;
    for (const auto& row : m)
        for (double x : row) s += x * x;
    return std::sqrt(s);
}

double off_diag_norm(const Matrix& m) {
    double s = 0;
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < m.size(); ++j)
            if (i != j) s += m[i][j] * m[i][j];
    return std::sqrt(s);
}

std::vector<double> jacobi_eigenvalues(Matrix a) {
    const size_t l = a.size();
    const double stop = 1e-12 * frobenius(a);
    constexpr int kMaxSweeps = 64;
    for (int sweep = 0; sweep < kMaxSweeps && off_diag_norm(a) > stop; ++sweep) {
        for (size_t p = 0; p + 1 < l; ++p) {
            for (size_t q = p + 1; q < l; ++q) {
                double apq = a[p][q];
                if (apq == 0.0) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = a[q][p] = 0.0;
                for (size_t k = 0; k < l; ++k) {
                    if (k == p || k == q) continue;
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = a[p][k] = c * akp - s * akq;
                    a[k][q] = a[q][k] = s * akp + c * akq;
                }
            }
        }
    }
    std::vector<double> ev(l);
    for (size_t i = 0; i < l; ++i) ev[i] = a[i][i];
    return ev;
}

// Partial Fisher-Yates: the first `count` positions end up holding a uniform
// sample without replacement.
std::vector<size_t> pick_indices(size_t total, size_t count, Rng& rng) {
    std::vector<size_t> idx(total);
    for (size_t i = 0; i < total; ++i) idx[i] = i;
    for (size_t i = 0; i < count && i + 1 < total; ++i) {
        size_t j = i + static_cast<size_t>(rng.u64_below(total - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(std::min(count, total));
    return idx;
}

struct MarkedDispersions {
    std::vector<double> injected;
    std::vector<double> clean;
};

MarkedDispersions dispersions_with_injection(std::span<const SampleSet> sets, uint64_t d,
                                             double alpha_sq, double inject_fraction,
                                             Rng& rng) {
    size_t count = sets.size();
    size_t n_inject = std::max<size_t>(
        1, static_cast<size_t>(std::llround(inject_fraction * static_cast<double>(count))));
    n_inject = std::min(n_inject, count);
    auto marked = pick_indices(count, n_inject, rng);
    std::vector<bool> is_marked(count, false);
    for (size_t i : marked) is_marked[i] = true;

    MarkedDispersions out;
    out.injected.reserve(n_inject);
    out.clean.reserve(count - n_inject);
    for (size_t i = 0; i < count; ++i) {
        double disp;
        if (is_marked[i]) {
            SampleSet perturbed;
            perturbed.reserve(sets[i].size());
            for (const auto& s : sets[i])
                perturbed.push_back(inject_deviation(s, alpha_sq, d, rng));
            disp = dispersion(scatter_matrix(perturbed)).dispersion;
            out.injected.push_back(disp);
        } else {
            disp = dispersion(scatter_matrix(sets[i])).dispersion;
            out.clean.push_back(disp);
        }
    }
    return out;
}

}  // namespace

std::vector<double> eigen_sym(const Matrix& m) {
    check_square(m);
    const size_t l = m.size();
    double tol = 1e-9 * max_abs(m);
    for (size_t i = 0; i < l; ++i)
        for (size_t j = i + 1; j < l; ++j)
            if (std::fabs(m[i][j] - m[j][i]) > tol)
                throw Error(Errc::argument, "matrix is not symmetric");

    std::vector<double> ev;
    if (l == 1) {
        ev = {m[0][0]};
    } else if (l == 2) {
        double tr = m[0][0] + m[1][1];
        double diff = m[0][0] - m[1][1];
        double disc = std::sqrt(diff * diff + 4.0 * m[0][1] * m[1][0]);
        ev = {(tr + disc) / 2.0, (tr - disc) / 2.0};
    } else {
        ev = jacobi_eigenvalues(m);
    }
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

DispersionResult dispersion(const Matrix& m) {
    auto ev = eigen_sym(m);
    double trace = 0;
    for (size_t i = 0; i < m.size(); ++i) trace += m[i][i];
    double tau = 1e-9 * std::max(1.0, trace);

    DispersionResult res;
    res.dispersion = 0.0;
    double prod = 1.0;
    for (double& v : ev) {
        if (v > tau) {
            prod *= v;
            ++res.rank_used;
        }
        if (v < 0.0) v = 0.0;
    }
    if (res.rank_used > 0) res.dispersion = prod;
    res.eigenvalues = std::move(ev);
    return res;
}

DataSample inject_deviation(const DataSample& sample, double alpha_sq, uint64_t d, Rng& rng) {
    if (alpha_sq <= 0) throw Error(Errc::argument, "deviation measurement must be positive");
    double sigma = std::sqrt(alpha_sq);
    DataSample out = sample;
    for (int64_t& v : out.v) {
        double delta = rng.normal(0.0, sigma);
        double shifted = static_cast<double>(v) +
                         std::floor(static_cast<double>(v) * delta);
        shifted = std::clamp(shifted, 0.0, static_cast<double>(d));
        v = static_cast<int64_t>(shifted);
    }
    return out;
}

Matrix scatter_matrix(const SampleSet& set) {
    if (set.size() < 2) throw Error(Errc::argument, "scatter needs at least 2 samples");
    SchemeDims dims{static_cast<uint32_t>(set[0].v.size()),
                    static_cast<uint32_t>(set.size()), 1};
    return packing::scatter_from_samples(dims, set).m;
}

Threshold train_threshold(std::span<const SampleSet> training_sets, uint64_t d,
                          double alpha_sq, double target_tpr, double inject_fraction,
                          Rng& rng) {
    if (training_sets.size() < 100)
        throw Error(Errc::argument, "training needs at least 100 sets");
    if (target_tpr <= 0 || target_tpr > 1)
        throw Error(Errc::argument, "target TPR must be in (0, 1]");
    if (inject_fraction <= 0 || inject_fraction > 1)
        throw Error(Errc::argument, "inject fraction must be in (0, 1]");

    auto marked = dispersions_with_injection(training_sets, d, alpha_sq, inject_fraction, rng);
    std::vector<double>& disp = marked.injected;
    std::sort(disp.begin(), disp.end());
    const size_t m = disp.size();
    const size_t k = static_cast<size_t>(std::ceil(target_tpr * static_cast<double>(m)));

    auto count_above = [&](double th) {
        return static_cast<size_t>(disp.end() -
                                   std::upper_bound(disp.begin(), disp.end(), th));
    };

    Threshold out{0.0, alpha_sq, static_cast<uint32_t>(training_sets[0].size()), target_tpr};
    // Start at the order statistic leaving k values above, then step down
    // through tied values until the flagged fraction actually meets target.
    for (long i = static_cast<long>(m) - static_cast<long>(k) - 1; i >= 0; --i) {
        if (disp[i] > 0 && count_above(disp[i]) >= k) {
            out.value = disp[i];
            return out;
        }
    }
    auto first_pos = std::find_if(disp.begin(), disp.end(), [](double x) { return x > 0; });
    if (first_pos == disp.end() || static_cast<size_t>(disp.end() - first_pos) < k)
        throw Error(Errc::training,
                    "cannot reach target TPR: too many injected sets have zero dispersion");
    out.value = std::nextafter(*first_pos, 0.0);
    return out;
}

EvalCounts evaluate(std::span<const SampleSet> testing_sets, uint64_t d,
                    const Threshold& threshold, double alpha_sq, double inject_fraction,
                    Rng& rng) {
    if (testing_sets.empty()) throw Error(Errc::argument, "no testing sets");

    auto marked = dispersions_with_injection(testing_sets, d, alpha_sq, inject_fraction, rng);
    EvalCounts counts;
    counts.n_tu = marked.injected.size();
    counts.n_tn = marked.clean.size();
    for (double v : marked.injected)
        if (v > threshold.value) ++counts.n_uu;
    for (double v : marked.clean)
        if (v > threshold.value) ++counts.n_nu;
    return counts;
}

}  // namespace fsd::detect

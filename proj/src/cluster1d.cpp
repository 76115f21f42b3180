#include "gapsense/cluster1d.h"

#include "gapsense/types.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gapsense {

namespace {

std::vector<Eigen::Index> argsort(const ValuesRef& v) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
    return idx;
}

} // namespace

TwoMeansResult two_means_1d(const ValuesRef& values) {
    const auto n = values.size();
    TwoMeansResult out;
    out.high.assign(static_cast<std::size_t>(n), false);
    if (!values.allFinite()) {
        throw ValidationError("2-means input contains non-finite values");
    }
    if (n < 2) {
        out.degenerate = true;
        return out;
    }

    const auto order = argsort(values);
    const double mean = values.mean();
    // Prefix sums of centered values keep the SSE differences well conditioned.
    std::vector<double> s1(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> s2(static_cast<std::size_t>(n) + 1, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double c = values[order[static_cast<std::size_t>(i)]] - mean;
        s1[static_cast<std::size_t>(i) + 1] = s1[static_cast<std::size_t>(i)] + c;
        s2[static_cast<std::size_t>(i) + 1] = s2[static_cast<std::size_t>(i)] + c * c;
    }
    const auto nn = static_cast<std::size_t>(n);

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_split = 0;
    for (std::size_t k = 1; k < nn; ++k) {
        if (!(values[order[k - 1]] < values[order[k]])) {
            continue;
        }
        const double lo_n = static_cast<double>(k);
        const double hi_n = static_cast<double>(nn - k);
        const double lo_sum = s1[k];
        const double hi_sum = s1[nn] - s1[k];
        const double sse = (s2[k] - lo_sum * lo_sum / lo_n) + ((s2[nn] - s2[k]) - hi_sum * hi_sum / hi_n);
        if (sse < best) {
            best = sse;
            best_split = k;
        }
    }
    if (best_split == 0) {
        out.degenerate = true;
        return out;
    }
    for (std::size_t k = best_split; k < nn; ++k) {
        out.high[static_cast<std::size_t>(order[k])] = true;
    }
    out.threshold = 0.5 * (values[order[best_split - 1]] + values[order[best_split]]);
    out.sse = std::max(0.0, best);
    return out;
}

KMeansResult kmeans_1d(const ValuesRef& values, int k, int max_iterations) {
    const auto n = values.size();
    if (k < 1) {
        throw ValidationError("k-means needs k >= 1");
    }
    if (n < k) {
        throw SizeError("k-means needs at least k values");
    }
    if (!values.allFinite()) {
        throw ValidationError("k-means input contains non-finite values");
    }
    const auto order = argsort(values);
    Eigen::VectorXd centers(k);
    for (int c = 0; c < k; ++c) {
        auto q = static_cast<Eigen::Index>(std::floor((c + 0.5) / k * static_cast<double>(n)));
        q = std::clamp<Eigen::Index>(q, 0, n - 1);
        centers[c] = values[order[static_cast<std::size_t>(q)]];
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    int it = 0;
    for (; it < max_iterations; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::abs(values[i] - centers[0]);
            for (int c = 1; c < k; ++c) {
                const double d = std::abs(values[i] - centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
        Eigen::VectorXi count = Eigen::VectorXi::Zero(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            sum[labels[static_cast<std::size_t>(i)]] += values[i];
            ++count[labels[static_cast<std::size_t>(i)]];
        }
        for (int c = 0; c < k; ++c) {
            if (count[c] > 0) {
                centers[c] = sum[c] / count[c];
            }
        }
    }

    // Drop empty clusters and renumber by ascending mean.
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
    Eigen::VectorXi count = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        sum[labels[static_cast<std::size_t>(i)]] += values[i];
        ++count[labels[static_cast<std::size_t>(i)]];
    }
    std::vector<int> live;
    for (int c = 0; c < k; ++c) {
        if (count[c] > 0) {
            live.push_back(c);
        }
    }
    std::stable_sort(live.begin(), live.end(),
                     [&](int a, int b) { return sum[a] / count[a] < sum[b] / count[b]; });
    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    KMeansResult out;
    out.k = static_cast<int>(live.size());
    out.centers.resize(out.k);
    for (int r = 0; r < out.k; ++r) {
        remap[static_cast<std::size_t>(live[static_cast<std::size_t>(r)])] = r;
        out.centers[r] = sum[live[static_cast<std::size_t>(r)]] / count[live[static_cast<std::size_t>(r)]];
    }
    out.labels.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        out.labels[static_cast<std::size_t>(i)] = remap[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    out.iterations = it;
    return out;
}

Eigen::VectorXd silhouette_1d(const ValuesRef& values, const std::vector<int>& labels) {
    const auto n = values.size();
    if (static_cast<std::size_t>(n) != labels.size()) {
        throw ValidationError("silhouette: values and labels differ in length");
    }
    const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

    // Sorted members and prefix sums per cluster: sum |x - y| over a cluster in O(log n).
    std::vector<std::vector<double>> members(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        members[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(values[i]);
    }
    std::vector<std::vector<double>> prefix(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        auto& m = members[static_cast<std::size_t>(c)];
        std::sort(m.begin(), m.end());
        auto& p = prefix[static_cast<std::size_t>(c)];
        p.assign(m.size() + 1, 0.0);
        for (std::size_t i = 0; i < m.size(); ++i) {
            p[i + 1] = p[i] + m[i];
        }
    }
    const auto abs_sum = [&](int c, double x) {
        const auto& m = members[static_cast<std::size_t>(c)];
        const auto& p = prefix[static_cast<std::size_t>(c)];
        const auto below = static_cast<std::size_t>(std::lower_bound(m.begin(), m.end(), x) - m.begin());
        const double lower = x * static_cast<double>(below) - p[below];
        const double upper = (p[m.size()] - p[below]) - x * static_cast<double>(m.size() - below);
        return lower + upper;
    };

    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int own = labels[static_cast<std::size_t>(i)];
        const auto own_n = members[static_cast<std::size_t>(own)].size();
        if (own_n <= 1) {
            continue;
        }
        const double a = abs_sum(own, values[i]) / static_cast<double>(own_n - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || members[static_cast<std::size_t>(c)].empty()) {
                continue;
            }
            b = std::min(b, abs_sum(c, values[i]) / static_cast<double>(members[static_cast<std::size_t>(c)].size()));
        }
        if (!std::isfinite(b)) {
            continue;
        }
        const double denom = std::max(a, b);
        s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return s;
}

double mean_silhouette_1d(const ValuesRef& values, const std::vector<int>& labels) {
    std::vector<int> distinct(labels);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) {
        return -1.0;
    }
    return silhouette_1d(values, labels).mean();
}

} // namespace gapsense

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

namespace oracle {

double histogram_relative_pe(const Eigen::MatrixXd& p_samples, const Eigen::MatrixXd& q_samples, double alpha,
                             int bins) {
    const Eigen::Index d = p_samples.rows();
    Eigen::VectorXd lo(d), hi(d);
    for (Eigen::Index r = 0; r < d; ++r) {
        lo[r] = std::min(p_samples.row(r).minCoeff(), q_samples.row(r).minCoeff());
        hi[r] = std::max(p_samples.row(r).maxCoeff(), q_samples.row(r).maxCoeff());
    }
    const auto cell = [&](const Eigen::VectorXd& x) {
        long key = 0;
        for (Eigen::Index r = 0; r < d; ++r) {
            const double u = (x[r] - lo[r]) / (hi[r] - lo[r]);
            const long b = std::clamp(static_cast<long>(u * bins), 0L, static_cast<long>(bins - 1));
            key = key * bins + b;
        }
        return key;
    };
    std::map<long, double> p, q;
    for (Eigen::Index i = 0; i < p_samples.cols(); ++i) {
        p[cell(p_samples.col(i))] += 1.0 / static_cast<double>(p_samples.cols());
    }
    for (Eigen::Index i = 0; i < q_samples.cols(); ++i) {
        q[cell(q_samples.col(i))] += 1.0 / static_cast<double>(q_samples.cols());
    }
    double sum = 0.0;
    for (const auto& [k, pk] : p) {
        const double qk = q.count(k) ? q.at(k) : 0.0;
        sum += pk * pk / (alpha * pk + (1.0 - alpha) * qk);
    }
    return 0.5 * (sum - 1.0);
}

namespace {

double sse_of(const std::vector<double>& v, const std::vector<bool>& high) {
    double s[2] = {0, 0};
    double n[2] = {0, 0};
    for (std::size_t i = 0; i < v.size(); ++i) {
        s[high[i]] += v[i];
        n[high[i]] += 1;
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double m = s[high[i]] / n[high[i]];
        sse += (v[i] - m) * (v[i] - m);
    }
    return sse;
}

} // namespace

Partition exhaustive_two_means(const std::vector<double>& values) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    Partition best;
    best.sse = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (sorted[i] == sorted[i + 1]) {
            continue;
        }
        const double thr = 0.5 * (sorted[i] + sorted[i + 1]);
        std::vector<bool> high(values.size());
        for (std::size_t j = 0; j < values.size(); ++j) {
            high[j] = values[j] > thr;
        }
        const double sse = sse_of(values, high);
        if (sse < best.sse) {
            best = {high, sse};
        }
    }
    return best;
}

Partition lloyd_best_of_all_pairs(const std::vector<double>& values) {
    Partition best;
    best.sse = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (!(values[i] < values[j])) {
                continue;
            }
            double c0 = values[i], c1 = values[j];
            std::vector<bool> high(values.size());
            for (int it = 0; it < 1000; ++it) {
                for (std::size_t k = 0; k < values.size(); ++k) {
                    high[k] = std::abs(values[k] - c1) < std::abs(values[k] - c0);
                }
                double s[2] = {0, 0}, n[2] = {0, 0};
                for (std::size_t k = 0; k < values.size(); ++k) {
                    s[high[k]] += values[k];
                    n[high[k]] += 1;
                }
                if (n[0] == 0 || n[1] == 0) {
                    break;
                }
                const double n0 = s[0] / n[0], n1 = s[1] / n[1];
                if (n0 == c0 && n1 == c1) {
                    break;
                }
                c0 = n0;
                c1 = n1;
            }
            if (std::count(high.begin(), high.end(), true) == 0 ||
                std::count(high.begin(), high.end(), false) == 0) {
                continue;
            }
            const double sse = sse_of(values, high);
            if (sse < best.sse) {
                best = {high, sse};
            }
        }
    }
    return best;
}

double silhouette_definition(const std::vector<double>& values, const std::vector<int>& labels) {
    const std::size_t n = values.size();
    std::map<int, int> size;
    for (int l : labels) {
        ++size[l];
    }
    if (size.size() < 2) {
        return -1.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (size[labels[i]] == 1) {
            continue;
        }
        std::map<int, double> dist;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                dist[labels[j]] += std::abs(values[i] - values[j]);
            }
        }
        const double a = dist[labels[i]] / (size[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [l, d] : dist) {
            if (l != labels[i]) {
                b = std::min(b, d / size[l]);
            }
        }
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(n);
}

double direct_cpsd_sum(const std::vector<double>& x, const std::vector<double>& y, double rate_hz) {
    const std::size_t n = x.size();
    std::vector<double> wx(n), wy(n);
    double wsum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
        wx[i] = w * x[i];
        wy[i] = w * y[i];
        wsum2 += w * w;
    }
    // r[k] = sum_i wx[i] * wy[(i + k) mod n]; its DFT is conj(X) * Y.
    std::vector<double> r(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += wx[i] * wy[(i + k) % n];
        }
        r[k] = acc;
    }
    const double scale = 1.0 / (rate_hz * wsum2);
    double total = 0.0;
    for (std::size_t f = 0; f <= n / 2; ++f) {
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((f * k) % n) / static_cast<double>(n);
            acc += r[k] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        const bool edge = f == 0 || (n % 2 == 0 && f == n / 2);
        total += std::abs(acc) * scale * (edge ? 1.0 : 2.0);
    }
    return total;
}

std::map<std::string, double> dft_band_fractions(const std::vector<double>& x, double rate_hz,
                                                 const std::map<std::string, std::pair<double, double>>& bands) {
    const std::size_t n = x.size();
    double time_energy = 0.0;
    for (double v : x) {
        time_energy += v * v;
    }
    std::map<std::string, double> out;
    for (const auto& [label, band] : bands) {
        double e = 0.0;
        for (std::size_t f = 1; f < n / 2; ++f) {
            const double hz = static_cast<double>(f) * rate_hz / static_cast<double>(n);
            if (hz < band.first || hz > band.second) {
                continue;
            }
            std::complex<double> acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double ang = -2.0 * std::numbers::pi * static_cast<double>((f * k) % n) / static_cast<double>(n);
                acc += x[k] * std::complex<double>(std::cos(ang), std::sin(ang));
            }
            // Positive and negative frequency halves; Parseval: sum |X|^2 = n * sum x^2.
            e += 2.0 * std::norm(acc) / static_cast<double>(n);
        }
        out[label] = e / time_energy;
    }
    return out;
}

std::vector<Eigen::Index> exhaustive_knn(const Eigen::MatrixXd& features, Eigen::Index key, int z) {
    std::vector<std::pair<double, Eigen::Index>> all;
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        if (j == key) {
            continue;
        }
        double s = 0.0;
        for (Eigen::Index r = 0; r < features.rows(); ++r) {
            const double d = features(r, j) - features(r, key);
            s += d * d;
        }
        all.emplace_back(std::sqrt(s), j);
    }
    std::sort(all.begin(), all.end());
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < all.size() && static_cast<int>(i) < z; ++i) {
        out.push_back(all[i].second);
    }
    return out;
}

std::pair<double, double> naive_accuracy_volume(const gapsense::AnnotationSet& ann,
                                                const std::vector<gapsense::TruthRecord>& truth,
                                                const std::vector<double>& grid) {
    long annotated = 0;
    long correct = 0;
    for (double t : grid) {
        const gapsense::AnnotationRecord* hit = nullptr;
        for (const auto& r : ann.records) {
            if (r.interval.start_ms <= t && t < r.interval.end_ms) {
                hit = &r;
            }
        }
        if (!hit) {
            continue;
        }
        ++annotated;
        for (const auto& tr : truth) {
            if (tr.user == ann.user && tr.interval.start_ms <= t && t < tr.interval.end_ms && tr.label == hit->label) {
                ++correct;
                break;
            }
        }
    }
    const double acc = annotated ? 100.0 * static_cast<double>(correct) / static_cast<double>(annotated) : 0.0;
    const double vol = grid.empty() ? 0.0 : 100.0 * static_cast<double>(annotated) / static_cast<double>(grid.size());
    return {acc, vol};
}

} // namespace oracle

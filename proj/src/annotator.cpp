#include "gapsense/annotator.h"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace gapsense {

namespace {

double dominant_frequency(const Eigen::VectorXd& centered, double rate_hz) {
    const auto n = static_cast<int>(centered.size());
    int nfft = 1;
    while (nfft < n) {
        nfft *= 2;
    }
    std::vector<double> buf(static_cast<std::size_t>(nfft), 0.0);
    std::copy(centered.data(), centered.data() + n, buf.begin());
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, buf);
    std::size_t best = 0;
    double best_mag = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
        const double m = std::norm(spec[k]);
        if (m > best_mag) {
            best_mag = m;
            best = k;
        }
    }
    return static_cast<double>(best) * rate_hz / nfft;
}

Eigen::Index samples_in(const ImuStream& s, const Interval& w) {
    const double* b = s.t_ms.data();
    const double* e = b + s.t_ms.size();
    return std::lower_bound(b, e, w.end_ms) - std::lower_bound(b, e, w.start_ms);
}

} // namespace

FeatureVector imu_features(const Eigen::Ref<const Accel>& accel, double rate_hz) {
    const Eigen::Index n = accel.cols();
    if (n < 2) {
        throw SizeError("features need at least two samples");
    }
    FeatureVector f;
    const auto nd = static_cast<double>(n);
    for (int a = 0; a < 3; ++a) {
        const Eigen::VectorXd x = accel.row(a).transpose();
        const double mean = x.mean();
        const Eigen::VectorXd c = x.array() - mean;
        int crossings = 0;
        for (Eigen::Index i = 1; i < n; ++i) {
            if ((c[i - 1] < 0.0) != (c[i] < 0.0)) {
                ++crossings;
            }
        }
        f[a] = mean;
        f[3 + a] = std::sqrt(c.squaredNorm() / nd);
        f[6 + a] = x.minCoeff();
        f[9 + a] = x.maxCoeff();
        f[12 + a] = std::sqrt(x.squaredNorm() / nd);
        f[15 + a] = crossings / (nd - 1.0);
        f[18 + a] = dominant_frequency(c, rate_hz);
    }
    f[21] = accel.cwiseAbs().colwise().sum().mean();
    return f;
}

SegmentFeatures segment_features(const ImuStream& s, const Interval& segment) {
    const ImuStream part = slice_imu(s, segment);
    return {segment, imu_features(part.accel, s.rate_hz)};
}

std::vector<Interval> segment_imu(const ImuStream& s, const ChangeTimeline& tl, int min_samples) {
    const Interval span = s.span();
    std::vector<Interval> changes = tl.changes;
    std::sort(changes.begin(), changes.end(),
              [](const Interval& a, const Interval& b) { return a.start_ms < b.start_ms; });

    std::vector<Interval> out;
    const auto emit = [&](double a, double b) {
        a = std::max(a, span.start_ms);
        b = std::min(b, span.end_ms);
        if (a < b) {
            const Interval w(a, b);
            if (samples_in(s, w) >= min_samples) {
                out.push_back(w);
            }
        }
    };
    double cursor = span.start_ms;
    for (const auto& c : changes) {
        if (c.start_ms > cursor) {
            emit(cursor, c.start_ms);
        }
        cursor = std::max(cursor, c.end_ms);
    }
    emit(cursor, span.end_ms);
    return out;
}

Interval key_segment(const std::string& user, const ActivityLabel& label,
                     const std::vector<AcousticWindow>& predictions, const std::vector<Interval>& segments) {
    if (segments.empty()) {
        throw AnnotationAborted("no IMU segments for " + user);
    }
    const AcousticWindow* hit = nullptr;
    double best = 0.0;
    for (const auto& p : predictions) {
        const double c = p.prediction.confidence_of(label);
        if (c > best || (c == best && c > 0.0 && hit && p.window.start_ms < hit->window.start_ms)) {
            best = c;
            hit = &p;
        }
    }
    if (!hit) {
        throw AnnotationAborted("no acoustic window reports '" + label + "' for " + user);
    }

    const Interval* key = nullptr;
    double key_overlap = 0.0;
    for (const auto& seg : segments) {
        const double ov = seg.overlap(hit->window);
        if (ov <= 0.0) {
            continue;
        }
        if (!key || ov > key_overlap || (ov == key_overlap && seg.duration() > key->duration())) {
            key = &seg;
            key_overlap = ov;
        }
    }
    if (key) {
        return *key;
    }
    double nearest = 0.0;
    for (const auto& seg : segments) {
        const double d = std::max(seg.start_ms - hit->window.end_ms, hit->window.start_ms - seg.end_ms);
        if (!key || d < nearest) {
            key = &seg;
            nearest = d;
        }
    }
    return *key;
}

Eigen::MatrixXd standardize_features(const Eigen::MatrixXd& raw) {
    Eigen::MatrixXd out(raw.rows(), raw.cols());
    const auto n = static_cast<double>(raw.cols());
    for (Eigen::Index r = 0; r < raw.rows(); ++r) {
        const double mean = raw.row(r).mean();
        const Eigen::RowVectorXd c = raw.row(r).array() - mean;
        const double sd = std::sqrt(c.squaredNorm() / n);
        if (sd > 0.0 && std::isfinite(sd)) {
            out.row(r) = c / sd;
        } else {
            out.row(r).setZero();
        }
    }
    return out;
}

std::vector<Eigen::Index> nearest_segments(const Eigen::MatrixXd& features, Eigen::Index key, int z) {
    if (z <= 0) {
        throw ValidationError("z must be positive");
    }
    if (key < 0 || key >= features.cols()) {
        throw RangeError("key column out of range");
    }
    const Eigen::VectorXd d = (features.colwise() - features.col(key)).colwise().norm().transpose();
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        if (j != key) {
            idx.push_back(j);
        }
    }
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return d[a] < d[b]; });
    idx.resize(std::min(idx.size(), static_cast<std::size_t>(z)));
    return idx;
}

const char* to_string(Provenance p) { return p == Provenance::key ? "key" : "knn"; }

AnnotationSet knn_annotate(const Interval& key, const std::vector<Interval>& segments, const ImuStream& s,
                           const ActivityLabel& label, int z) {
    if (z <= 0) {
        throw ValidationError("z must be positive");
    }
    if (segments.size() < 2) {
        throw SizeError("nearest-neighbour annotation needs at least two segments");
    }
    const auto it = std::find(segments.begin(), segments.end(), key);
    if (it == segments.end()) {
        throw ValidationError("key is not one of the segments");
    }
    const auto key_col = static_cast<Eigen::Index>(it - segments.begin());

    Eigen::MatrixXd raw(kFeatureDim, static_cast<Eigen::Index>(segments.size()));
    for (std::size_t j = 0; j < segments.size(); ++j) {
        raw.col(static_cast<Eigen::Index>(j)) = segment_features(s, segments[j]).values;
    }
    const Eigen::MatrixXd feats = standardize_features(raw);

    AnnotationSet out;
    out.user = s.user_id;
    out.z_used = z;
    out.records.push_back({key, label, Provenance::key, 0.0});
    for (const Eigen::Index j : nearest_segments(feats, key_col, z)) {
        out.records.push_back(
            {segments[static_cast<std::size_t>(j)], label, Provenance::knn, (feats.col(j) - feats.col(key_col)).norm()});
    }
    std::sort(out.records.begin(), out.records.end(),
              [](const AnnotationRecord& a, const AnnotationRecord& b) { return a.interval.start_ms < b.interval.start_ms; });
    return out;
}

} // namespace gapsense

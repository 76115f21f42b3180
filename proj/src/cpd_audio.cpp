#include "gapsense/cpd_audio.h"

#include "gapsense/cluster1d.h"

#include <cmath>
#include <optional>

namespace gapsense {

void AudioCpdConfig::validate() const {
    if (!(segment_len_ms >= 100.0)) {
        throw ValidationError("segment_len_ms must be >= 100");
    }
    if (max_clusters < 2 || max_clusters > 16) {
        throw ValidationError("max_clusters must lie in [2, 16]");
    }
    if (fft_len < 2 || (fft_len & (fft_len - 1)) != 0) {
        throw ValidationError("fft_len must be a power of two");
    }
    if (!(welch_overlap_fraction >= 0.0 && welch_overlap_fraction < 1.0)) {
        throw ValidationError("welch_overlap_fraction must lie in [0, 1)");
    }
}

CpsdValue cpsd_value(const AudioStream& seg_a, const AudioStream& seg_b, const AudioCpdConfig& cfg) {
    cfg.validate();
    if (seg_a.size() != seg_b.size()) {
        throw ValidationError("cpsd segments differ in length");
    }
    if (seg_a.rate_hz != seg_b.rate_hz) {
        throw ValidationError("cpsd segments differ in sampling rate");
    }
    const BlockSpectra<float> a(seg_a.samples, seg_a.rate_hz, cfg.welch());
    const BlockSpectra<float> b(seg_b.samples, seg_b.rate_hz, cfg.welch());
    if (a.silent() || b.silent()) {
        return {0.0, true};
    }
    return {static_cast<double>(a.cross(b).cwiseAbs().sum()), false};
}

CpsdSeries audio_change_series(const AudioStream& a, const AudioCpdConfig& cfg) {
    cfg.validate();
    a.validate();
    const auto seg = static_cast<Eigen::Index>(std::llround(cfg.segment_len_ms * a.rate_hz / 1000.0));
    const Eigen::Index segments = seg > 0 ? a.size() / seg : 0;
    if (segments < 2) {
        throw SizeError("audio shorter than two segments");
    }
    CpsdSeries out;
    out.segment_ms = static_cast<double>(seg) * 1000.0 / a.rate_hz;
    out.t_ms.resize(segments - 1);
    out.value.resize(segments - 1);
    out.silent.assign(static_cast<std::size_t>(segments - 1), false);

    std::optional<BlockSpectra<float>> prev;
    prev.emplace(a.samples.segment(0, seg), a.rate_hz, cfg.welch());
    for (Eigen::Index k = 1; k < segments; ++k) {
        BlockSpectra<float> cur(a.samples.segment(k * seg, seg), a.rate_hz, cfg.welch());
        const bool silent = prev->silent() || cur.silent();
        out.t_ms[k - 1] = a.t0_ms + static_cast<double>(k) * out.segment_ms;
        out.value[k - 1] = silent ? 0.0 : static_cast<double>(prev->cross(cur).cwiseAbs().sum());
        out.silent[static_cast<std::size_t>(k - 1)] = silent;
        prev.emplace(std::move(cur));
    }
    return out;
}

CpsdClustering cluster_cpsd(const Eigen::VectorXd& values, const AudioCpdConfig& cfg) {
    cfg.validate();
    CpsdClustering out;
    if (values.size() < cfg.max_clusters + 1) {
        throw SizeError("need at least max_clusters + 1 CPSD values, got " + std::to_string(values.size()));
    }
    if (values.maxCoeff() == values.minCoeff()) {
        out.degenerate = true;
        return out;
    }
    double best = -2.0;
    for (int c = 2; c <= cfg.max_clusters; ++c) {
        const KMeansResult km = kmeans_1d(values, c);
        const double s = km.k >= 2 ? mean_silhouette_1d(values, km.labels) : -1.0;
        out.silhouette.push_back(s);
        if (km.k >= 2 && s > best) {
            best = s;
            out.clusters = c;
            out.labels = km.labels;
        }
    }
    if (out.clusters == 0) {
        out.degenerate = true;
    }
    return out;
}

ChangeTimeline demarcate_audio_changes(const CpsdSeries& series, const AudioCpdConfig& cfg) {
    ChangeTimeline tl;
    tl.source = Modality::audio;
    const CpsdClustering cl = cluster_cpsd(series.value, cfg);
    if (cl.degenerate) {
        tl.degenerate = true;
        return tl;
    }
    std::vector<bool> flagged(cl.labels.size());
    for (std::size_t i = 0; i < cl.labels.size(); ++i) {
        flagged[i] = cl.labels[i] == 0;
    }
    tl.changes = merge_flagged_points(series.t_ms, flagged, series.segment_ms, series.segment_ms, 2);
    return tl;
}

} // namespace gapsense

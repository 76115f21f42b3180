#pragma once

#include "gapsense/spectral.h"
#include "gapsense/timeline.h"
#include "gapsense/types.h"

#include <cstdint>
#include <vector>

namespace gapsense {

struct AudioCpdConfig {
    double segment_len_ms = 1000.0;
    int fft_len = 4096;
    double welch_overlap_fraction = 0.5;
    int max_clusters = 6;
    std::uint64_t rng_seed = 0;

    void validate() const;
    WelchOptions welch() const { return {fft_len, welch_overlap_fraction}; }
};

struct CpsdValue {
    double value = 0.0;
    bool silent = false;
};

/// Sum over frequency bins of |Pxy| between two equal-length segments.
/// Higher means more similar consecutive context.
CpsdValue cpsd_value(const AudioStream& seg_a, const AudioStream& seg_b, const AudioCpdConfig& cfg);

struct CpsdSeries {
    Eigen::VectorXd t_ms;  ///< boundary between the two compared segments
    Eigen::VectorXd value;
    std::vector<bool> silent;
    double segment_ms = 0.0;

    Eigen::Index size() const noexcept { return t_ms.size(); }
};

/// One CPSD value per pair of consecutive non-overlapping segments.
CpsdSeries audio_change_series(const AudioStream& a, const AudioCpdConfig& cfg);

struct CpsdClustering {
    int clusters = 0;              ///< selected c
    std::vector<double> silhouette; ///< mean silhouette for c = 2 .. max_clusters (-1 if not populated)
    std::vector<int> labels;       ///< cluster per point, ordered by ascending mean
    bool degenerate = false;
};

/// k-means for every c in [2, max_clusters]; keeps the c with the highest
/// mean silhouette (ties favour the smaller c).
CpsdClustering cluster_cpsd(const Eigen::VectorXd& values, const AudioCpdConfig& cfg);

/// Points in the minimum-mean cluster become change intervals covering both
/// adjoining segments; flagged points at most one segment apart merge.
ChangeTimeline demarcate_audio_changes(const CpsdSeries& series, const AudioCpdConfig& cfg);

} // namespace gapsense

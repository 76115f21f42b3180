#pragma once

#include "gapsense/har.h"
#include "gapsense/timeline.h"
#include "gapsense/types.h"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace gapsense {

/// Raised when a user cannot be annotated (e.g. no acoustic window supports
/// the mapped label).
class AnnotationAborted : public Error {
public:
    using Error::Error;
};

constexpr int kFeatureDim = 22;
using FeatureVector = Eigen::Matrix<double, kFeatureDim, 1>;

/// Per axis: mean, std, min, max, RMS, zero-crossing rate of the mean-removed
/// signal, dominant frequency (Hz). Then signal magnitude area.
/// Layout: [mean x y z, std x y z, min .., max .., rms .., zcr .., fdom .., sma].
FeatureVector imu_features(const Eigen::Ref<const Accel>& accel, double rate_hz);

struct SegmentFeatures {
    Interval segment;
    FeatureVector values;
};

SegmentFeatures segment_features(const ImuStream& s, const Interval& segment);

/// Stretches between change intervals (and before the first / after the last)
/// within the stream span. Stretches with fewer than `min_samples` samples
/// are dropped.
std::vector<Interval> segment_imu(const ImuStream& s, const ChangeTimeline& tl, int min_samples = 25);

/// A classified stretch of the global audio.
struct AcousticWindow {
    Interval window;
    HarPrediction prediction;
};

/// Segment overlapping most with the acoustic window that reports `label`
/// with the highest confidence (earliest window on ties). Overlap ties go to
/// the longer, then the earlier segment; without any overlap the segment
/// nearest to the window is used.
Interval key_segment(const std::string& user, const ActivityLabel& label,
                     const std::vector<AcousticWindow>& predictions, const std::vector<Interval>& segments);

/// Zero mean, unit variance per row over the columns; constant rows become 0.
Eigen::MatrixXd standardize_features(const Eigen::MatrixXd& raw);

/// Indices of the min(z, n - 1) columns closest to column `key` in Euclidean
/// distance, nearest first. Equal distances keep column order.
std::vector<Eigen::Index> nearest_segments(const Eigen::MatrixXd& features, Eigen::Index key, int z);

enum class Provenance { key, knn };

const char* to_string(Provenance p);

struct AnnotationRecord {
    Interval interval;
    ActivityLabel label;
    Provenance provenance = Provenance::knn;
    double distance = 0.0; ///< standardized feature distance to the key
};

struct AnnotationSet {
    std::string user;
    std::vector<AnnotationRecord> records; ///< sorted by start time
    int z_used = 0;
};

/// Labels the key segment and its z nearest neighbours among `segments`
/// (features of `s`, standardized over these segments).
AnnotationSet knn_annotate(const Interval& key, const std::vector<Interval>& segments, const ImuStream& s,
                           const ActivityLabel& label, int z);

} // namespace gapsense

#pragma once

#include "gapsense/rulsif.h"
#include "gapsense/timeline.h"
#include "gapsense/types.h"

#include <vector>

namespace gapsense {

struct CpdConfig {
    /// Samples per window (f).
    int window_len = 25;
    /// Windows pooled on each side of a score boundary.
    int group_size = 1;
    RatioFitOptions ratio;

    void validate() const;
};

/// f consecutive accelerometer samples.
struct ImuWindow {
    Interval span;
    Eigen::Matrix3Xd samples;

    /// The window as one 3f-dimensional vector (x0, y0, z0, x1, ...).
    Eigen::Map<const Eigen::VectorXd> flattened() const {
        return {samples.data(), samples.size()};
    }
};

/// Non-overlapping consecutive windows of exactly `window_len` samples;
/// a trailing remainder shorter than one window is dropped.
std::vector<ImuWindow> imu_windows(const ImuStream& s, const CpdConfig& cfg);

/// Change-point scores between consecutive window groups.
struct ScoreSeries {
    Eigen::VectorXd t_ms;  ///< boundary between the retro and forward group
    Eigen::VectorXd score; ///< symmetrized relative PE, clamped at 0
    std::vector<bool> degenerate;
    double step_ms = 0.0; ///< window duration

    Eigen::Index size() const noexcept { return t_ms.size(); }
};

/// Slides one window at a time; yields |windows| - 2 * group_size + 1 points.
ScoreSeries imu_change_scores(const ImuStream& s, const CpdConfig& cfg);

/// 2-means over the scores; points of the higher-mean cluster become change
/// intervals of one window width, and flagged points at most one window apart
/// are merged.
ChangeTimeline demarcate_changes(const ScoreSeries& scores, const std::string& user = {});

} // namespace gapsense

#pragma once

#include "gapsense/types.h"

#include <string>
#include <vector>

namespace gapsense {

enum class Modality { imu, audio };

const char* to_string(Modality m);

/// Sorted, non-overlapping change intervals detected in one stream.
struct ChangeTimeline {
    std::vector<Interval> changes;
    Modality source = Modality::imu;
    std::string user; ///< empty for the shared audio stream
    bool degenerate = false;

    bool any_intersects(const Interval& w) const;
};

/// Turns flagged series points into merged change intervals.
///
/// Point i covers [t[i] - before_ms, t[i] + after_ms]. Flagged points whose
/// indices differ by at most `max_index_gap` are merged into one interval.
std::vector<Interval> merge_flagged_points(const Eigen::VectorXd& t_ms, const std::vector<bool>& flagged,
                                           double before_ms, double after_ms, int max_index_gap);

/// CSV with the given header and one `t,value` row per point.
std::string format_series_csv(const std::string& header, const Eigen::VectorXd& t_ms,
                              const Eigen::VectorXd& values);

} // namespace gapsense

#include "gapsense/cpd_imu.h"

#include "gapsense/cluster1d.h"

#include <cmath>

namespace gapsense {

void RatioFitOptions::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must lie in [0, 1)");
    }
    if (n_kernel_centers < 1) {
        throw ValidationError("need at least one kernel center");
    }
    if (sigma_candidates.empty() && sigma_scales.empty()) {
        throw ValidationError("no kernel width candidates");
    }
    for (double s : sigma_candidates) {
        if (!(s > 0.0)) {
            throw ValidationError("kernel widths must be positive");
        }
    }
    for (double s : sigma_scales) {
        if (!(s > 0.0)) {
            throw ValidationError("kernel width scales must be positive");
        }
    }
    if (lambda_candidates.empty()) {
        throw ValidationError("no regularization candidates");
    }
    for (double l : lambda_candidates) {
        if (!(l >= 0.0)) {
            throw ValidationError("regularization candidates must be non-negative");
        }
    }
    if (cv_folds < 1) {
        throw ValidationError("cv_folds must be >= 1");
    }
}

void CpdConfig::validate() const {
    if (window_len < 2) {
        throw ValidationError("window_len must be >= 2");
    }
    if (group_size < 1) {
        throw ValidationError("group_size must be >= 1");
    }
    ratio.validate();
}

std::vector<ImuWindow> imu_windows(const ImuStream& s, const CpdConfig& cfg) {
    cfg.validate();
    const Eigen::Index f = cfg.window_len;
    if (s.size() < f) {
        throw SizeError("imu stream of " + std::to_string(s.size()) + " samples is shorter than one window");
    }
    const Eigen::Index count = s.size() / f;
    std::vector<ImuWindow> out;
    out.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index w = 0; w < count; ++w) {
        const Eigen::Index first = w * f;
        const double end = first + f < s.size() ? s.t_ms[first + f] : s.t_ms[first + f - 1] + s.period_ms();
        out.push_back({Interval(s.t_ms[first], end), s.accel.middleCols(first, f)});
    }
    return out;
}

ScoreSeries imu_change_scores(const ImuStream& s, const CpdConfig& cfg) {
    cfg.validate();
    if (!s.accel.allFinite()) {
        throw ValidationError("imu stream contains non-finite samples");
    }
    const Eigen::Index f = cfg.window_len;
    const Eigen::Index g = cfg.group_size;
    const Eigen::Index windows = s.size() / f;
    if (windows < 2 * g) {
        throw SizeError("imu stream too short for change scoring: " + std::to_string(windows) +
                        " windows, need " + std::to_string(2 * g));
    }
    const Eigen::Index points = windows - 2 * g + 1;

    ScoreSeries out;
    out.t_ms.resize(points);
    out.score.resize(points);
    out.degenerate.assign(static_cast<std::size_t>(points), false);
    out.step_ms = static_cast<double>(f) * s.period_ms();

    for (Eigen::Index p = 0; p < points; ++p) {
        const Eigen::Index boundary = (p + g) * f;
        const auto retro = s.accel.middleCols(boundary - g * f, g * f);
        const auto forward = s.accel.middleCols(boundary, g * f);
        const PeScore sc = pe_divergence_score(retro, forward, cfg.ratio);
        out.t_ms[p] = s.t_ms[boundary];
        out.score[p] = sc.value;
        out.degenerate[static_cast<std::size_t>(p)] = sc.degenerate;
    }
    return out;
}

ChangeTimeline demarcate_changes(const ScoreSeries& scores, const std::string& user) {
    ChangeTimeline tl;
    tl.source = Modality::imu;
    tl.user = user;
    if (scores.size() == 0) {
        tl.degenerate = true;
        return tl;
    }
    const TwoMeansResult split = two_means_1d(scores.score);
    if (split.degenerate) {
        tl.degenerate = true;
        return tl;
    }
    const double half = 0.5 * scores.step_ms;
    tl.changes = merge_flagged_points(scores.t_ms, split.high, half, half, 2);
    return tl;
}

} // namespace gapsense

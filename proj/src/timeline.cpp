#include "gapsense/timeline.h"

#include "gapsense/io.h"

#include <algorithm>

namespace gapsense {

const char* to_string(Modality m) { return m == Modality::imu ? "imu" : "audio"; }

bool ChangeTimeline::any_intersects(const Interval& w) const {
    return std::any_of(changes.begin(), changes.end(), [&](const Interval& c) { return c.intersects(w); });
}

std::vector<Interval> merge_flagged_points(const Eigen::VectorXd& t_ms, const std::vector<bool>& flagged,
                                           double before_ms, double after_ms, int max_index_gap) {
    if (static_cast<std::size_t>(t_ms.size()) != flagged.size()) {
        throw ValidationError("flags and timestamps differ in length");
    }
    std::vector<Interval> out;
    Eigen::Index run_start = -1;
    Eigen::Index last = -1;
    const auto close_run = [&] {
        if (run_start >= 0) {
            out.emplace_back(t_ms[run_start] - before_ms, t_ms[last] + after_ms);
        }
    };
    for (Eigen::Index i = 0; i < t_ms.size(); ++i) {
        if (!flagged[static_cast<std::size_t>(i)]) {
            continue;
        }
        if (run_start < 0) {
            run_start = i;
        } else if (i - last > max_index_gap) {
            close_run();
            run_start = i;
        }
        last = i;
    }
    close_run();
    return out;
}

std::string format_series_csv(const std::string& header, const Eigen::VectorXd& t_ms, const Eigen::VectorXd& values) {
    std::string out = header + "\n";
    for (Eigen::Index i = 0; i < t_ms.size(); ++i) {
        out += format_number(t_ms[i]);
        out += ',';
        out += format_number(values[i]);
        out += '\n';
    }
    return out;
}

} // namespace gapsense

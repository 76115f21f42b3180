#include "gapsense/types.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace gapsense {

Interval::Interval(double start, double end) : start_ms(start), end_ms(end) {
    if (!(start < end)) {
        throw ValidationError("interval start must precede end: [" + std::to_string(start) + ", " +
                              std::to_string(end) + "]");
    }
}

double Interval::overlap(const Interval& other) const noexcept {
    return std::max(0.0, std::min(end_ms, other.end_ms) - std::max(start_ms, other.start_ms));
}

// ---------------------------------------------------------------------------

ImuStream::ImuStream(std::string user, Eigen::VectorXd t, Accel a, double rate)
    : user_id(std::move(user)), t_ms(std::move(t)), accel(std::move(a)), rate_hz(rate) {
    if (t_ms.size() != accel.cols()) {
        throw ValidationError("imu timestamps and samples differ in length");
    }
}

Interval ImuStream::span() const {
    if (t_ms.size() == 0) {
        throw ValidationError("empty imu stream has no span");
    }
    return {t_ms[0], t_ms[t_ms.size() - 1] + period_ms()};
}

void ImuStream::validate() const {
    if (t_ms.size() == 0) {
        throw ValidationError("imu stream " + user_id + " is empty");
    }
    if (t_ms.size() != accel.cols()) {
        throw ValidationError("imu timestamps and samples differ in length");
    }
    if (!(rate_hz > 0.0)) {
        throw ValidationError("imu rate must be positive");
    }
    if (!accel.allFinite() || !t_ms.allFinite()) {
        throw ValidationError("imu stream " + user_id + " contains non-finite values");
    }
    for (Eigen::Index k = 1; k < t_ms.size(); ++k) {
        if (!(t_ms[k] > t_ms[k - 1])) {
            throw ValidationError("imu stream " + user_id + ": timestamp regression at sample " +
                                  std::to_string(k));
        }
    }

    // Sample count per 10 s block must stay within 10% of nominal.
    constexpr double block_ms = 10000.0;
    const double expected = block_ms * rate_hz / 1000.0;
    const double t_begin = t_ms[0];
    const double t_end = t_ms[t_ms.size() - 1];
    Eigen::Index k = 0;
    for (double b = t_begin; b + block_ms <= t_end; b += block_ms) {
        Eigen::Index count = 0;
        while (k < t_ms.size() && t_ms[k] < b + block_ms) {
            ++count;
            ++k;
        }
        if (std::abs(static_cast<double>(count) - expected) > 0.1 * expected) {
            throw ValidationError("imu stream " + user_id + ": rate outside 10% of nominal near t=" +
                                  std::to_string(b) + " ms");
        }
    }
}

// ---------------------------------------------------------------------------

AudioStream::AudioStream(Eigen::VectorXf s, double rate, double t0)
    : samples(std::move(s)), rate_hz(rate), t0_ms(t0) {}

void AudioStream::validate() const {
    if (!(rate_hz > 0.0)) {
        throw ValidationError("audio rate must be positive");
    }
    if (!samples.allFinite()) {
        throw ValidationError("audio contains non-finite samples");
    }
}

// ---------------------------------------------------------------------------

const char* to_string(ActivityKind kind) {
    return kind == ActivityKind::primary ? "primary" : "auxiliary";
}

ActivityKind activity_kind_from_string(const std::string& s) {
    if (s == "primary") {
        return ActivityKind::primary;
    }
    if (s == "auxiliary") {
        return ActivityKind::auxiliary;
    }
    throw ValidationError("unknown activity kind '" + s + "'");
}

std::vector<TruthRecord> Scenario::truth_for(const std::string& user) const {
    std::vector<TruthRecord> out;
    for (const auto& r : ground_truth) {
        if (r.user == user) {
            out.push_back(r);
        }
    }
    std::sort(out.begin(), out.end(), [](const TruthRecord& a, const TruthRecord& b) {
        return a.interval.start_ms < b.interval.start_ms;
    });
    return out;
}

const ImuStream& Scenario::imu(const std::string& user) const {
    if (imu_a.user_id == user) {
        return imu_a;
    }
    if (imu_b.user_id == user) {
        return imu_b;
    }
    throw ValidationError("unknown user '" + user + "'");
}

void Scenario::validate() const {
    imu_a.validate();
    imu_b.validate();
    audio.validate();
    if (imu_a.user_id == imu_b.user_id) {
        throw ValidationError("both imu streams belong to user '" + imu_a.user_id + "'");
    }
    if (!(horizon_ms > 0.0)) {
        throw ValidationError("scenario horizon must be positive");
    }
    const auto check_cover = [&](const Interval& span, double period, const char* what) {
        if (span.end_ms + period < horizon_ms) {
            throw AlignmentError(std::string(what) + " ends before the scenario horizon");
        }
    };
    check_cover(imu_a.span(), imu_a.period_ms(), "imu stream A");
    check_cover(imu_b.span(), imu_b.period_ms(), "imu stream B");
    check_cover(audio.span(), 1000.0 / audio.rate_hz, "audio stream");

    std::map<std::string, std::vector<Interval>> per_user;
    for (const auto& r : ground_truth) {
        if (r.user != imu_a.user_id && r.user != imu_b.user_id) {
            throw ValidationError("ground truth names unknown user '" + r.user + "'");
        }
        per_user[r.user].push_back(r.interval);
    }
    for (auto& [user, ivs] : per_user) {
        std::sort(ivs.begin(), ivs.end(),
                  [](const Interval& a, const Interval& b) { return a.start_ms < b.start_ms; });
        for (std::size_t i = 1; i < ivs.size(); ++i) {
            if (ivs[i].start_ms < ivs[i - 1].end_ms) {
                throw ValidationError("overlapping ground truth intervals for user '" + user + "'");
            }
        }
    }
}

LabelSpace::LabelSpace(std::vector<ActivityLabel> labels) : labels_(std::move(labels)) {
    std::set<ActivityLabel> seen;
    for (const auto& l : labels_) {
        if (l.empty()) {
            throw ValidationError("empty activity label");
        }
        if (!seen.insert(l).second) {
            throw ValidationError("duplicate activity label '" + l + "'");
        }
    }
}

bool LabelSpace::contains(const ActivityLabel& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

// ---------------------------------------------------------------------------

AudioStream slice_audio(const AudioStream& a, const Interval& w) {
    const double half_sample = 500.0 / a.rate_hz;
    const Interval span = a.span();
    if (w.start_ms < span.start_ms - half_sample || w.end_ms > span.end_ms + half_sample) {
        throw RangeError("audio slice [" + std::to_string(w.start_ms) + ", " + std::to_string(w.end_ms) +
                         ") outside stream extent");
    }
    const auto index_of = [&](double t) {
        const auto i = static_cast<Eigen::Index>(std::llround((t - a.t0_ms) * a.rate_hz / 1000.0));
        return std::clamp<Eigen::Index>(i, 0, a.size());
    };
    const Eigen::Index i0 = index_of(w.start_ms);
    const Eigen::Index i1 = index_of(w.end_ms);
    return AudioStream(a.samples.segment(i0, i1 - i0), a.rate_hz, w.start_ms);
}

ImuStream slice_imu(const ImuStream& s, const Interval& w) {
    const Interval span = s.span();
    const double half_period = 0.5 * s.period_ms();
    if (w.start_ms < span.start_ms - half_period || w.end_ms > span.end_ms + half_period) {
        throw RangeError("imu slice [" + std::to_string(w.start_ms) + ", " + std::to_string(w.end_ms) +
                         ") outside stream extent");
    }
    const double* begin = s.t_ms.data();
    const double* end = begin + s.t_ms.size();
    const auto i0 = static_cast<Eigen::Index>(std::lower_bound(begin, end, w.start_ms) - begin);
    const auto i1 = static_cast<Eigen::Index>(std::lower_bound(begin, end, w.end_ms) - begin);
    return ImuStream(s.user_id, s.t_ms.segment(i0, i1 - i0), s.accel.middleCols(i0, i1 - i0), s.rate_hz);
}

double rebase_to_earliest(ImuStream& a, ImuStream& b, AudioStream& audio, std::vector<TruthRecord>* truth) {
    double epoch = audio.t0_ms;
    if (a.size() > 0) {
        epoch = std::min(epoch, a.t_ms[0]);
    }
    if (b.size() > 0) {
        epoch = std::min(epoch, b.t_ms[0]);
    }
    a.t_ms.array() -= epoch;
    b.t_ms.array() -= epoch;
    audio.t0_ms -= epoch;
    if (truth) {
        for (auto& r : *truth) {
            r.interval.start_ms -= epoch;
            r.interval.end_ms -= epoch;
        }
    }
    return epoch;
}

} // namespace gapsense

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gapsense {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input row or header. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------

/// Half-open time interval [start_ms, end_ms).
struct Interval {
    double start_ms = 0.0;
    double end_ms = 0.0;

    Interval() = default;
    Interval(double start, double end);

    double duration() const noexcept { return end_ms - start_ms; }
    double center() const noexcept { return 0.5 * (start_ms + end_ms); }
    bool contains(const Interval& other) const noexcept {
        return start_ms <= other.start_ms && other.end_ms <= end_ms;
    }
    bool contains(double t) const noexcept { return start_ms <= t && t < end_ms; }
    bool intersects(const Interval& other) const noexcept {
        return start_ms < other.end_ms && other.start_ms < end_ms;
    }
    double overlap(const Interval& other) const noexcept;
    Interval dilated(double before_ms, double after_ms) const {
        return {start_ms - before_ms, end_ms + after_ms};
    }

    bool operator==(const Interval&) const = default;
};

// ---------------------------------------------------------------------------
// Streams
// ---------------------------------------------------------------------------

using Accel = Eigen::Matrix3Xd;

/// Tri-axial accelerometer stream of one user. Column k of `accel` is the
/// sample taken at `t_ms[k]`.
struct ImuStream {
    std::string user_id;
    Eigen::VectorXd t_ms;
    Accel accel;
    double rate_hz = 50.0;

    ImuStream() = default;
    ImuStream(std::string user, Eigen::VectorXd t, Accel a, double rate = 50.0);

    Eigen::Index size() const noexcept { return t_ms.size(); }
    double period_ms() const noexcept { return 1000.0 / rate_hz; }
    /// [first timestamp, last timestamp + one period).
    Interval span() const;

    /// Throws ValidationError if timestamps regress, samples are non-finite,
    /// the stream is empty, or the rate drifts more than 10% from nominal.
    void validate() const;
};

/// Mono audio normalized to [-1, 1].
struct AudioStream {
    Eigen::VectorXf samples;
    double rate_hz = 44100.0;
    double t0_ms = 0.0;

    AudioStream() = default;
    AudioStream(Eigen::VectorXf s, double rate, double t0 = 0.0);

    Eigen::Index size() const noexcept { return samples.size(); }
    double duration_ms() const noexcept {
        return static_cast<double>(samples.size()) * 1000.0 / rate_hz;
    }
    Interval span() const { return {t0_ms, t0_ms + duration_ms()}; }

    void validate() const;
};

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

using ActivityLabel = std::string;

enum class ActivityKind { primary, auxiliary };

const char* to_string(ActivityKind kind);
ActivityKind activity_kind_from_string(const std::string& s);

struct TruthRecord {
    std::string user;
    Interval interval;
    ActivityLabel label;
    ActivityKind kind = ActivityKind::primary;

    bool operator==(const TruthRecord&) const = default;
};

struct Scenario {
    ImuStream imu_a;
    ImuStream imu_b;
    AudioStream audio;
    double horizon_ms = 0.0;
    std::vector<TruthRecord> ground_truth;

    bool has_truth() const noexcept { return !ground_truth.empty(); }
    std::vector<TruthRecord> truth_for(const std::string& user) const;
    const ImuStream& imu(const std::string& user) const;

    void validate() const;
};

/// Closed set of primary activity labels the pipeline may assign.
class LabelSpace {
public:
    LabelSpace() = default;
    explicit LabelSpace(std::vector<ActivityLabel> labels);

    bool contains(const ActivityLabel& label) const;
    const std::vector<ActivityLabel>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }

private:
    std::vector<ActivityLabel> labels_;
};

// ---------------------------------------------------------------------------
// Slicing
// ---------------------------------------------------------------------------

/// Samples of `a` inside `w`. The result starts at `w.start_ms`.
AudioStream slice_audio(const AudioStream& a, const Interval& w);

/// Samples of `s` whose timestamps fall in `w`.
ImuStream slice_imu(const ImuStream& s, const Interval& w);

/// Shift every timestamp of the scenario inputs so the earliest one is 0.
/// Returns the removed offset.
double rebase_to_earliest(ImuStream& a, ImuStream& b, AudioStream& audio,
                          std::vector<TruthRecord>* truth = nullptr);

} // namespace gapsense

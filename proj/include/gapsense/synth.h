#pragma once

#include "gapsense/har.h"
#include "gapsense/types.h"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gapsense {

/// Label used in ground truth for the stops between primary runs.
inline const ActivityLabel kAuxiliaryLabel = "auxiliary";

struct ImuSignature {
    double freq_hz = 2.0;
    double amplitude = 3.0; ///< m/s^2 on the dominant axis
    Eigen::Vector3d axis_gain{1.0, 0.6, 0.3};
    Eigen::Vector3d phase{0.0, 1.0, 2.0};
    double jitter_sd = 0.25;
};

struct ActivityProfile {
    ActivityLabel label;
    FrequencyBand audio_band;
    double audio_amplitude = 0.25;
    ImuSignature imu;
    /// Frequency of the low-amplitude (0.3x) motion during stops.
    double auxiliary_freq_hz = 6.0;
    double mean_gap_s = 2.0;
    double gap_rate_per_min = 1.5;
    /// The IMU leaves the primary signature this long after a stop begins
    /// and returns this long before it ends.
    double transition_lead_ms = 150.0;

    void validate(double audio_rate_hz) const;
};

struct SynthConfig {
    double duration_s = 600.0;
    std::array<std::string, 2> users{"U1", "U2"};
    std::array<ActivityProfile, 2> profiles;
    double noise_floor = 0.005;        ///< white-noise standard deviation
    double spurious_event_rate = 1.0;  ///< broadband bursts per minute
    double burst_amplitude = 0.2;
    double audio_rate_hz = 44100.0;
    double imu_rate_hz = 50.0;
    /// Postpone a stop of the second user that would come within
    /// `stop_margin_ms` of a stop of the first user. Negative disables.
    double stop_margin_ms = 2000.0;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// "workshop" (hammer / saw, short stops) or "kitchen" (chopping / cooking,
/// long stops).
SynthConfig preset(const std::string& name, double duration_s, std::uint64_t seed);

/// Band profiles matching the preset's two activities.
std::map<ActivityLabel, FrequencyBand> preset_bands(const SynthConfig& cfg);

/// Primary label set of the configuration, in profile order.
LabelSpace label_space(const SynthConfig& cfg);

/// Alternating runs and stops for one user; ground truth covers [0, duration).
/// A stop that would come within `margin_ms` of a `blocked` interval is
/// moved past it.
std::vector<TruthRecord> draw_schedule(const ActivityProfile& p, const std::string& user, double duration_ms,
                                       std::uint64_t seed, const std::vector<Interval>& blocked = {},
                                       double margin_ms = 0.0);

Scenario generate(const SynthConfig& cfg);

/// One user recorded alone.
struct SoloScenario {
    ImuStream imu;
    AudioStream audio;
    std::vector<TruthRecord> truth;
};

/// Single-user recording of profile `which` of `cfg` (no noise floor or bursts).
SoloScenario generate_solo(const SynthConfig& cfg, int which);

/// Aligns both recordings on the earliest timestamp, mixes the audio by
/// addition through the soft limiter (the shorter input is zero-padded) and
/// passes the IMU streams through unchanged.
Scenario augment_pair(const SoloScenario& a, const SoloScenario& b);

/// Identity on [-knee, knee], smooth saturation towards +-1 beyond.
float soft_limit(float x, float knee = 0.9f);

/// The configuration as JSON text (two-space indent).
std::string synth_config_json(const SynthConfig& cfg);

} // namespace gapsense

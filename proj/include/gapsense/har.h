#pragma once

#include "gapsense/spectral.h"
#include "gapsense/types.h"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace gapsense {

struct LabelConfidence {
    ActivityLabel label;
    double confidence = 0.0;

    bool operator==(const LabelConfidence&) const = default;
};

/// Detected activities sorted by descending confidence (ties by label).
struct HarPrediction {
    std::vector<LabelConfidence> labels;

    bool empty() const noexcept { return labels.empty(); }
    /// Highest-confidence label that belongs to `space`.
    std::optional<LabelConfidence> top_in(const LabelSpace& space) const;
    double confidence_of(const ActivityLabel& label) const;

    void sort();
};

/// Audio activity recognizer queried by the mapper and the annotator.
/// Implementations are immutable after construction and deterministic.
class HarBackend {
public:
    virtual ~HarBackend() = default;
    virtual HarPrediction classify(const AudioStream& segment) const = 0;
    virtual const std::vector<ActivityLabel>& label_space() const = 0;
};

/// Test double that reads the answer off the ground truth: every primary
/// activity sounding during the segment is reported with confidence equal to
/// the fraction of the segment it covers. With probability `noise_rate` one
/// extra label is injected at confidence <= 0.3.
class OracleBackend final : public HarBackend {
public:
    OracleBackend(std::vector<TruthRecord> truth, double horizon_ms, double noise_rate, std::uint64_t rng_seed,
                  std::vector<ActivityLabel> noise_labels = {"speech", "door", "dog_bark", "air_conditioner"});

    HarPrediction classify(const AudioStream& segment) const override;
    const std::vector<ActivityLabel>& label_space() const override { return labels_; }

private:
    std::vector<TruthRecord> truth_;
    double horizon_ms_;
    double noise_rate_;
    std::uint64_t seed_;
    std::vector<ActivityLabel> labels_;
};

struct FrequencyBand {
    double lo_hz = 0.0;
    double hi_hz = 0.0;
};

/// Reports every label whose band holds at least `threshold` of the
/// segment's Welch power; confidence is that energy fraction.
class BandEnergyBackend final : public HarBackend {
public:
    BandEnergyBackend(std::map<ActivityLabel, FrequencyBand> profiles, double threshold, int fft_len = 4096);

    HarPrediction classify(const AudioStream& segment) const override;
    const std::vector<ActivityLabel>& label_space() const override { return labels_; }

    /// Fraction of total power in each profile band.
    std::vector<std::pair<ActivityLabel, double>> band_fractions(const AudioStream& segment) const;

private:
    std::map<ActivityLabel, FrequencyBand> profiles_;
    double threshold_;
    int fft_len_;
    std::vector<ActivityLabel> labels_;
};

std::unique_ptr<HarBackend> oracle_backend(const Scenario& scn, double noise_rate, std::uint64_t rng_seed);
std::unique_ptr<HarBackend> bandenergy_backend(std::map<ActivityLabel, FrequencyBand> profiles, double threshold);

} // namespace gapsense

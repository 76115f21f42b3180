#pragma once

#include "gapsense/annotator.h"
#include "gapsense/cpd_audio.h"
#include "gapsense/cpd_imu.h"
#include "gapsense/har.h"
#include "gapsense/io.h"
#include "gapsense/mapper.h"
#include "gapsense/types.h"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gapsense {

struct HarConfig {
    std::string backend = "bandenergy"; ///< "bandenergy" or "oracle"
    /// bandenergy: per-label frequency band and detection threshold.
    std::map<ActivityLabel, FrequencyBand> bands;
    double threshold = 0.2;
    /// oracle: probability of an injected spurious label.
    double noise_rate = 0.1;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct PipelineConfig {
    /// Primary activity labels. Empty means the bandenergy band labels.
    std::vector<ActivityLabel> labels;
    int z = 15;
    CpdConfig imu_cpd;
    AudioCpdConfig audio_cpd;
    MapperConfig mapper;
    HarConfig har;
    /// Length of the audio windows scanned for the key segment.
    double key_window_ms = 1000.0;

    void validate() const;
    LabelSpace label_space() const;
};

/// Strict JSON reader: unknown keys and wrong types are validation errors,
/// malformed JSON is a ParseError. Missing keys keep their defaults.
PipelineConfig parse_pipeline_config(const std::string& json_text);
PipelineConfig read_pipeline_config(const fs::path& path);
std::string pipeline_config_json(const PipelineConfig& cfg);

std::unique_ptr<HarBackend> make_backend(const PipelineConfig& cfg, const Scenario& scn);

struct StageTimings {
    double imu_cpd_ms = 0.0;
    double audio_cpd_ms = 0.0;
    double mapper_ms = 0.0;
    double annotator_ms = 0.0;
};

struct PipelineResult {
    ScoreSeries scores_a;
    ScoreSeries scores_b;
    CpsdSeries cpsd;
    ChangeTimeline imu_a;
    ChangeTimeline imu_b;
    ChangeTimeline audio;
    ExclusiveChangeList exclusive_a;
    ExclusiveChangeList exclusive_b;
    VoteResult vote_from_a; ///< label for user B
    VoteResult vote_from_b; ///< label for user A
    UserActivityMap mapping;
    std::vector<AnnotationSet> annotations;
    std::map<std::string, std::string> diagnostics; ///< per user, why annotation was skipped
    StageTimings timings;

    bool all_decided() const;
};

/// Change detection on both IMU streams and the audio, activity-to-user
/// mapping, then key-segment nearest-neighbour annotation per mapped user.
/// Failures inside a stage are rethrown with the stage name prefixed.
PipelineResult run_pipeline(const Scenario& scn, const PipelineConfig& cfg);
PipelineResult run_pipeline(const Scenario& scn, const PipelineConfig& cfg, const HarBackend& backend);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Instance timestamps of a uniform grid covering the user's ground truth.
Eigen::VectorXd truth_instance_grid(const std::vector<TruthRecord>& truth, const std::string& user,
                                    double rate_hz = 50.0);

/// Percentage of annotated instances whose label matches the truth; nullopt
/// when nothing is annotated.
std::optional<double> annotation_accuracy(const AnnotationSet& ann, const std::vector<TruthRecord>& truth,
                                          const Eigen::VectorXd& grid_t_ms);
/// Percentage of grid instances covered by an annotation.
double annotation_volume(const AnnotationSet& ann, const Eigen::VectorXd& grid_t_ms);

struct UserEval {
    std::string user;
    std::optional<ActivityLabel> truth_label;
    std::optional<ActivityLabel> mapped_label;
    bool mapping_correct = false;
    std::size_t exclusive_changes = 0;
    std::size_t annotated_segments = 0;
    std::optional<double> accuracy_pct;
    double volume_pct = 0.0;
};

struct EvalReport {
    std::vector<UserEval> users;
    /// No user received a wrong label and at least one user was labeled.
    bool mapping_correct = false;
    bool has_truth = false;
    StageTimings timings;
};

/// Primary label the ground truth gives `user` (the one covering most time).
std::optional<ActivityLabel> truth_primary_label(const std::vector<TruthRecord>& truth, const std::string& user);

EvalReport evaluate(const Scenario& scn, const PipelineResult& res);

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

std::string mapping_json(const PipelineResult& res);
std::string report_json(const EvalReport& report);
/// Detected IMU and audio change intervals.
std::string changes_json(const PipelineResult& res);
std::string annotations_jsonl(const std::vector<AnnotationSet>& sets);
std::vector<AnnotationSet> parse_annotations_jsonl(const std::string& text);
std::string timings_json(const StageTimings& t);

/// Accuracy and volume of predicted annotations per user, measured on the
/// 50 Hz grid spanned by that user's ground truth.
std::string annotation_eval_json(const std::vector<AnnotationSet>& pred, const std::vector<TruthRecord>& truth);

/// Writes mapping.json, annotations.jsonl and report.json into `dir`; with
/// `dump_scores` also imu_scores_<user>.csv, audio_cpsd.csv
/// and changes.json.
void write_outputs(const fs::path& dir, const Scenario& scn, const PipelineResult& res, const EvalReport& report,
                   bool dump_scores);

} // namespace gapsense

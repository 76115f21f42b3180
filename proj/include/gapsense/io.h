#pragma once

#include "gapsense/types.h"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gapsense {

namespace fs = std::filesystem;

// IMU CSV: header `t_ms,ax,ay,az`, one sample per LF-terminated row.
// Gaps of up to two missing samples are filled by linear interpolation.
ImuStream read_imu_csv(const fs::path& path, const std::string& user_id, double nominal_rate_hz = 50.0);
ImuStream parse_imu_csv(const std::string& text, const std::string& user_id, double nominal_rate_hz = 50.0);
void write_imu_csv(const fs::path& path, const ImuStream& s);
std::string format_imu_csv(const ImuStream& s);

// RIFF WAV, mono PCM16. Samples are divided by 32768 on load.
AudioStream read_wav(const fs::path& path, double t0_ms = 0.0);
AudioStream parse_wav(const std::string& bytes, double t0_ms = 0.0);
void write_wav(const fs::path& path, const AudioStream& a);
std::string encode_wav(const AudioStream& a);

/// Round to the PCM16 grid so a write/read cycle is the identity.
float quantize_pcm16(float x);

// Ground truth JSON Lines:
// {"user":"U1","start_ms":0,"end_ms":4200,"label":"hammering","kind":"primary"}
std::vector<TruthRecord> read_truth_jsonl(const fs::path& path);
std::vector<TruthRecord> parse_truth_jsonl(const std::string& text);
void write_truth_jsonl(const fs::path& path, const std::vector<TruthRecord>& truth);

/// Loads both IMU streams, the global audio and optional ground truth,
/// re-bases every timestamp to the earliest one and validates the result.
/// User ids default to "U1" and "U2" in argument order.
Scenario load_scenario(const std::array<fs::path, 2>& imu_paths, const fs::path& audio_path,
                       const std::optional<fs::path>& truth_path = std::nullopt, double audio_t0_ms = 0.0,
                       const std::array<std::string, 2>& user_ids = {"U1", "U2"});

struct ScenarioFiles {
    fs::path imu_a;
    fs::path imu_b;
    fs::path audio;
    fs::path truth;
};

/// Writes u1.csv, u2.csv, global.wav and truth.jsonl into `dir`.
ScenarioFiles write_scenario(const fs::path& dir, const Scenario& scn);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& contents);

/// Shortest round-trip decimal for `v`.
std::string format_number(double v);
/// `v` printed with exactly `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

} // namespace gapsense

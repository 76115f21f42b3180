#include "gapsense/io.h"
#include "gapsense/pipeline.h"
#include "gapsense/synth.h"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUndecided = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitIo = 4;

int cmd_run(const std::vector<std::string>& imu, const std::string& audio, const std::string& config,
            const std::string& truth, const std::string& out, double audio_t0_ms, bool dump_scores, bool timings) {
    using namespace gapsense;
    const PipelineConfig cfg = read_pipeline_config(config);
    std::optional<fs::path> truth_path;
    if (!truth.empty()) {
        truth_path = truth;
    }
    const Scenario scn = load_scenario({imu[0], imu[1]}, audio, truth_path, audio_t0_ms);
    const PipelineResult res = run_pipeline(scn, cfg);
    const EvalReport report = evaluate(scn, res);
    write_outputs(out, scn, res, report, dump_scores);
    if (timings) {
        write_file(fs::path(out) / "timings.json", timings_json(res.timings));
    }
    for (const auto& [user, why] : res.diagnostics) {
        std::cerr << user << ": " << why << "\n";
    }
    return res.all_decided() ? kExitOk : kExitUndecided;
}

int cmd_synth(const std::string& preset_name, std::uint64_t seed, double duration_s, const std::string& out,
              double audio_rate_hz, std::optional<double> gap_rate_a, std::optional<double> gap_rate_b) {
    using namespace gapsense;
    SynthConfig cfg = preset(preset_name, duration_s, seed);
    cfg.audio_rate_hz = audio_rate_hz;
    if (gap_rate_a) {
        cfg.profiles[0].gap_rate_per_min = *gap_rate_a;
    }
    if (gap_rate_b) {
        cfg.profiles[1].gap_rate_per_min = *gap_rate_b;
    }
    const Scenario scn = generate(cfg);
    write_scenario(out, scn);
    write_file(fs::path(out) / "scenario.json", synth_config_json(cfg));
    return kExitOk;
}

int cmd_eval(const std::string& pred, const std::string& truth) {
    using namespace gapsense;
    const auto sets = parse_annotations_jsonl(read_file(pred));
    std::cout << annotation_eval_json(sets, read_truth_jsonl(truth));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-modal IMU annotation from acoustic gaps"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Map activities to users and annotate their IMU streams");
    std::vector<std::string> imu;
    std::string audio, config, truth, out;
    double audio_t0_ms = 0.0;
    bool dump_scores = false, timings = false;
    run->add_option("--imu", imu, "IMU CSV, once per user")->required()->expected(2)->check(CLI::ExistingFile);
    run->add_option("--audio", audio, "Global mono PCM16 WAV")->required()->check(CLI::ExistingFile);
    run->add_option("--config", config, "Pipeline config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--truth", truth, "Ground truth JSONL")->check(CLI::ExistingFile);
    run->add_option("--out", out, "Output directory")->required();
    run->add_option("--audio-t0-ms", audio_t0_ms, "Timestamp of the first audio sample");
    run->add_flag("--dump-scores", dump_scores, "Write IMU score and CPSD series as CSV");
    run->add_flag("--timings", timings, "Write per-stage timings to timings.json");

    auto* synth = app.add_subcommand("synth", "Generate a seeded two-user scenario");
    std::string preset_name;
    std::uint64_t seed = 0;
    double duration_s = 600.0, audio_rate_hz = 44100.0;
    std::optional<double> gap_rate_a, gap_rate_b;
    std::string synth_out;
    synth->add_option("--preset", preset_name)->required()->check(CLI::IsMember({"workshop", "kitchen"}));
    synth->add_option("--seed", seed)->required();
    synth->add_option("--duration", duration_s, "Seconds")->required();
    synth->add_option("--out", synth_out)->required();
    synth->add_option("--audio-rate", audio_rate_hz, "Audio sampling rate in Hz");
    synth->add_option("--gap-rate-u1", gap_rate_a, "Stops per minute of the first user");
    synth->add_option("--gap-rate-u2", gap_rate_b, "Stops per minute of the second user");

    auto* eval = app.add_subcommand("eval", "Score annotations against ground truth");
    std::string pred, eval_truth;
    eval->add_option("--pred", pred)->required()->check(CLI::ExistingFile);
    eval->add_option("--truth", eval_truth)->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*run) {
            return cmd_run(imu, audio, config, truth, out, audio_t0_ms, dump_scores, timings);
        }
        if (*synth) {
            return cmd_synth(preset_name, seed, duration_s, synth_out, audio_rate_hz, gap_rate_a, gap_rate_b);
        }
        return cmd_eval(pred, eval_truth);
    } catch (const gapsense::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const gapsense::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
}

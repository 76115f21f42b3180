#include "gapsense/pipeline.h"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <set>

namespace gapsense {

using nlohmann::json;

void HarConfig::validate() const {
    if (backend == "bandenergy") {
        if (bands.empty()) {
            throw ValidationError("bandenergy backend needs frequency bands");
        }
        if (!(threshold > 0.0 && threshold <= 1.0)) {
            throw ValidationError("har threshold must lie in (0, 1]");
        }
    } else if (backend == "oracle") {
        if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
            throw ValidationError("har noise_rate must lie in [0, 1]");
        }
    } else {
        throw ValidationError("unknown har backend '" + backend + "' (expected bandenergy or oracle)");
    }
}

LabelSpace PipelineConfig::label_space() const {
    if (!labels.empty()) {
        return LabelSpace(labels);
    }
    std::vector<ActivityLabel> from_bands;
    for (const auto& [label, band] : har.bands) {
        from_bands.push_back(label);
    }
    return LabelSpace(std::move(from_bands));
}

void PipelineConfig::validate() const {
    if (z < 1) {
        throw ValidationError("z must be >= 1");
    }
    if (!(key_window_ms > 0.0)) {
        throw ValidationError("key_window_ms must be positive");
    }
    imu_cpd.validate();
    audio_cpd.validate();
    mapper.validate();
    har.validate();
    if (label_space().size() == 0) {
        throw ValidationError("no primary activity labels configured");
    }
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) {
        throw ValidationError(where + " must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ValidationError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

FrequencyBand band_from(const json& j, const std::string& label) {
    if (!j.is_array() || j.size() != 2) {
        throw ValidationError("band of '" + label + "' must be [lo_hz, hi_hz]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, json_text.size());
        const auto line = 1 + static_cast<std::size_t>(std::count(json_text.begin(), json_text.begin() + upto, '\n'));
        throw ParseError(std::string("malformed config JSON: ") + e.what(), line);
    }

    PipelineConfig cfg;
    try {
        check_keys(root, {"labels", "z", "imu_cpd", "audio_cpd", "mapper", "har", "key_window_ms"}, "config");
        read_opt(root, "labels", cfg.labels);
        read_opt(root, "z", cfg.z);
        read_opt(root, "key_window_ms", cfg.key_window_ms);
        if (root.contains("imu_cpd")) {
            const json& j = root["imu_cpd"];
            check_keys(j,
                       {"window_len", "group_size", "alpha", "n_kernel_centers", "sigma_scales", "sigma_candidates",
                        "lambda_candidates", "cv_folds", "rng_seed"},
                       "imu_cpd");
            read_opt(j, "window_len", cfg.imu_cpd.window_len);
            read_opt(j, "group_size", cfg.imu_cpd.group_size);
            read_opt(j, "alpha", cfg.imu_cpd.ratio.alpha);
            read_opt(j, "n_kernel_centers", cfg.imu_cpd.ratio.n_kernel_centers);
            read_opt(j, "sigma_scales", cfg.imu_cpd.ratio.sigma_scales);
            read_opt(j, "sigma_candidates", cfg.imu_cpd.ratio.sigma_candidates);
            read_opt(j, "lambda_candidates", cfg.imu_cpd.ratio.lambda_candidates);
            read_opt(j, "cv_folds", cfg.imu_cpd.ratio.cv_folds);
            read_opt(j, "rng_seed", cfg.imu_cpd.ratio.rng_seed);
        }
        if (root.contains("audio_cpd")) {
            const json& j = root["audio_cpd"];
            check_keys(j, {"segment_len_ms", "fft_len", "welch_overlap_fraction", "max_clusters", "rng_seed"},
                       "audio_cpd");
            read_opt(j, "segment_len_ms", cfg.audio_cpd.segment_len_ms);
            read_opt(j, "fft_len", cfg.audio_cpd.fft_len);
            read_opt(j, "welch_overlap_fraction", cfg.audio_cpd.welch_overlap_fraction);
            read_opt(j, "max_clusters", cfg.audio_cpd.max_clusters);
            read_opt(j, "rng_seed", cfg.audio_cpd.rng_seed);
        }
        if (root.contains("mapper")) {
            const json& j = root["mapper"];
            check_keys(j, {"min_gap_ms", "adjust_pre_ms", "adjust_post_ms", "context_pad_ms", "assign_by_elimination"},
                       "mapper");
            read_opt(j, "min_gap_ms", cfg.mapper.min_gap_ms);
            read_opt(j, "adjust_pre_ms", cfg.mapper.adjust_pre_ms);
            read_opt(j, "adjust_post_ms", cfg.mapper.adjust_post_ms);
            read_opt(j, "context_pad_ms", cfg.mapper.context_pad_ms);
            read_opt(j, "assign_by_elimination", cfg.mapper.assign_by_elimination);
        }
        if (root.contains("har")) {
            const json& j = root["har"];
            check_keys(j, {"backend", "bands", "threshold", "noise_rate", "rng_seed"}, "har");
            read_opt(j, "backend", cfg.har.backend);
            read_opt(j, "threshold", cfg.har.threshold);
            read_opt(j, "noise_rate", cfg.har.noise_rate);
            read_opt(j, "rng_seed", cfg.har.rng_seed);
            if (j.contains("bands")) {
                if (!j["bands"].is_object()) {
                    throw ValidationError("har.bands must map labels to [lo_hz, hi_hz]");
                }
                for (const auto& [label, band] : j["bands"].items()) {
                    cfg.har.bands[label] = band_from(band, label);
                }
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

PipelineConfig read_pipeline_config(const fs::path& path) { return parse_pipeline_config(read_file(path)); }

std::string pipeline_config_json(const PipelineConfig& cfg) {
    json bands = json::object();
    for (const auto& [label, b] : cfg.har.bands) {
        bands[label] = {b.lo_hz, b.hi_hz};
    }
    const auto& r = cfg.imu_cpd.ratio;
    const json j = {
        {"labels", cfg.labels},
        {"z", cfg.z},
        {"key_window_ms", cfg.key_window_ms},
        {"imu_cpd",
         {{"window_len", cfg.imu_cpd.window_len},
          {"group_size", cfg.imu_cpd.group_size},
          {"alpha", r.alpha},
          {"n_kernel_centers", r.n_kernel_centers},
          {"sigma_scales", r.sigma_scales},
          {"sigma_candidates", r.sigma_candidates},
          {"lambda_candidates", r.lambda_candidates},
          {"cv_folds", r.cv_folds},
          {"rng_seed", r.rng_seed}}},
        {"audio_cpd",
         {{"segment_len_ms", cfg.audio_cpd.segment_len_ms},
          {"fft_len", cfg.audio_cpd.fft_len},
          {"welch_overlap_fraction", cfg.audio_cpd.welch_overlap_fraction},
          {"max_clusters", cfg.audio_cpd.max_clusters},
          {"rng_seed", cfg.audio_cpd.rng_seed}}},
        {"mapper",
         {{"min_gap_ms", cfg.mapper.min_gap_ms},
          {"adjust_pre_ms", cfg.mapper.adjust_pre_ms},
          {"adjust_post_ms", cfg.mapper.adjust_post_ms},
          {"context_pad_ms", cfg.mapper.context_pad_ms},
          {"assign_by_elimination", cfg.mapper.assign_by_elimination}}},
        {"har",
         {{"backend", cfg.har.backend},
          {"bands", bands},
          {"threshold", cfg.har.threshold},
          {"noise_rate", cfg.har.noise_rate},
          {"rng_seed", cfg.har.rng_seed}}},
    };
    return j.dump(2) + "\n";
}

std::unique_ptr<HarBackend> make_backend(const PipelineConfig& cfg, const Scenario& scn) {
    cfg.har.validate();
    if (cfg.har.backend == "oracle") {
        return oracle_backend(scn, cfg.har.noise_rate, cfg.har.rng_seed);
    }
    return bandenergy_backend(cfg.har.bands, cfg.har.threshold);
}

bool PipelineResult::all_decided() const {
    return std::all_of(mapping.assignments.begin(), mapping.assignments.end(),
                       [](const auto& kv) { return kv.second.decided(); });
}

namespace {

template <typename F>
auto in_stage(const std::string& name, F&& f) -> decltype(f()) {
    const std::string tag = "[" + name + "] ";
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError(tag + e.what());
    } catch (const SizeError& e) {
        throw SizeError(tag + e.what());
    } catch (const RangeError& e) {
        throw RangeError(tag + e.what());
    } catch (const AlignmentError& e) {
        throw AlignmentError(tag + e.what());
    }
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::vector<AcousticWindow> classify_windows(const AudioStream& audio, const HarBackend& backend, double window_ms) {
    std::vector<AcousticWindow> out;
    const Interval span = audio.span();
    for (double t = span.start_ms; t + window_ms <= span.end_ms; t += window_ms) {
        const Interval w(t, t + window_ms);
        out.push_back({w, backend.classify(slice_audio(audio, w))});
    }
    return out;
}

} // namespace

PipelineResult run_pipeline(const Scenario& scn, const PipelineConfig& cfg) {
    const auto backend = make_backend(cfg, scn);
    return run_pipeline(scn, cfg, *backend);
}

PipelineResult run_pipeline(const Scenario& scn, const PipelineConfig& cfg, const HarBackend& backend) {
    cfg.validate();
    scn.validate();
    const LabelSpace labels = cfg.label_space();
    const AudioStream audio = slice_audio(
        scn.audio, Interval(std::max(scn.audio.t0_ms, 0.0), std::min(scn.audio.span().end_ms, scn.horizon_ms)));

    PipelineResult res;
    auto t0 = std::chrono::steady_clock::now();
    in_stage("imu_cpd", [&] {
        res.scores_a = imu_change_scores(scn.imu_a, cfg.imu_cpd);
        res.scores_b = imu_change_scores(scn.imu_b, cfg.imu_cpd);
        res.imu_a = demarcate_changes(res.scores_a, scn.imu_a.user_id);
        res.imu_b = demarcate_changes(res.scores_b, scn.imu_b.user_id);
    });
    res.timings.imu_cpd_ms = elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    in_stage("audio_cpd", [&] {
        res.cpsd = audio_change_series(audio, cfg.audio_cpd);
        res.audio = demarcate_audio_changes(res.cpsd, cfg.audio_cpd);
    });
    res.timings.audio_cpd_ms = elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    in_stage("mapper", [&] {
        auto [ex_a, ex_b] = find_exclusive_changes(res.imu_a, res.imu_b, res.audio, cfg.mapper);
        res.exclusive_a = std::move(ex_a);
        res.exclusive_b = std::move(ex_b);
        res.vote_from_a =
            vote_activity_for_other(res.exclusive_a, scn.imu_b.user_id, backend, audio, labels, cfg.mapper);
        res.vote_from_b =
            vote_activity_for_other(res.exclusive_b, scn.imu_a.user_id, backend, audio, labels, cfg.mapper);
        res.mapping = resolve(res.vote_from_a, res.vote_from_b, res.exclusive_a.size(), res.exclusive_b.size(),
                              cfg.mapper, labels);
    });
    res.timings.mapper_ms = elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    in_stage("annotator", [&] {
        std::vector<AcousticWindow> windows;
        bool classified = false;
        for (const auto* pair : {&res.imu_a, &res.imu_b}) {
            const ImuStream& s = scn.imu(pair->user);
            const Assignment& a = res.mapping.at(s.user_id);
            if (!a.decided()) {
                res.diagnostics[s.user_id] = "no activity mapped";
                continue;
            }
            if (!classified) {
                windows = classify_windows(audio, backend, cfg.key_window_ms);
                classified = true;
            }
            try {
                const auto segments = segment_imu(s, *pair, cfg.imu_cpd.window_len);
                const Interval key = key_segment(s.user_id, *a.label, windows, segments);
                res.annotations.push_back(knn_annotate(key, segments, s, *a.label, cfg.z));
            } catch (const AnnotationAborted& e) {
                res.diagnostics[s.user_id] = e.what();
            } catch (const SizeError& e) {
                res.diagnostics[s.user_id] = e.what();
            }
        }
    });
    res.timings.annotator_ms = elapsed_ms(t0);
    return res;
}

} // namespace gapsense

#include "gapsense/synth.h"

#include "gapsense/io.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace gapsense {

namespace {

constexpr double kGravity = 9.81;
constexpr double kMinGapMs = 1200.0;
constexpr double kFadeMs = 10.0;
constexpr double kBurstMs = 150.0;
constexpr int kTonesPerSource = 6;

enum class Stream : std::uint32_t { schedule = 1, imu = 2, tones = 3, noise = 4, bursts = 5 };

std::mt19937_64 rng_for(std::uint64_t seed, Stream what, int user = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(what), static_cast<std::uint32_t>(user)};
    return std::mt19937_64(seq);
}

std::vector<Interval> gaps_of(const std::vector<TruthRecord>& schedule) {
    std::vector<Interval> out;
    for (const auto& r : schedule) {
        if (r.kind == ActivityKind::auxiliary) {
            out.push_back(r.interval);
        }
    }
    return out;
}

Eigen::Index sample_at(double t_ms, double rate_hz) {
    return static_cast<Eigen::Index>(std::llround(t_ms * rate_hz / 1000.0));
}

ImuStream render_imu(const ActivityProfile& p, const std::string& user, const std::vector<Interval>& gaps,
                     double duration_ms, double rate_hz, std::uint64_t seed, int user_index) {
    auto rng = rng_for(seed, Stream::imu, user_index);
    std::normal_distribution<double> jitter(0.0, p.imu.jitter_sd);

    const auto n = static_cast<Eigen::Index>(std::floor(duration_ms * rate_hz / 1000.0));
    Eigen::VectorXd t(n);
    Accel accel(3, n);
    const double two_pi = 2.0 * std::numbers::pi;
    std::size_t g = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double tk = static_cast<double>(k) * 1000.0 / rate_hz;
        t[k] = tk;
        while (g < gaps.size() && gaps[g].end_ms - p.transition_lead_ms <= tk) {
            ++g;
        }
        const bool auxiliary = g < gaps.size() && tk >= gaps[g].start_ms + p.transition_lead_ms &&
                               tk < gaps[g].end_ms - p.transition_lead_ms;
        const double amp = auxiliary ? 0.3 * p.imu.amplitude : p.imu.amplitude;
        const double freq = auxiliary ? p.auxiliary_freq_hz : p.imu.freq_hz;
        for (int a = 0; a < 3; ++a) {
            double v = p.imu.axis_gain[a] * amp * std::sin(two_pi * freq * tk / 1000.0 + p.imu.phase[a]);
            v += jitter(rng);
            if (a == 2) {
                v += kGravity;
            }
            accel(a, k) = std::round(v * 1e6) / 1e6;
        }
    }
    return {user, std::move(t), std::move(accel), rate_hz};
}

/// Sum of tones inside the profile band, silenced (with short fades) during
/// the user's stops.
Eigen::VectorXf render_source(const ActivityProfile& p, const std::vector<Interval>& gaps, Eigen::Index n,
                              double rate_hz, std::uint64_t seed, int user_index) {
    auto rng = rng_for(seed, Stream::tones, user_index);
    std::uniform_real_distribution<double> freq(p.audio_band.lo_hz, p.audio_band.hi_hz);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    const double a = p.audio_amplitude * std::sqrt(2.0 / kTonesPerSource);
    for (int k = 0; k < kTonesPerSource; ++k) {
        const double f = freq(rng);
        std::complex<double> z = std::polar(1.0, phase(rng));
        const std::complex<double> w = std::polar(1.0, 2.0 * std::numbers::pi * f / rate_hz);
        for (Eigen::Index i = 0; i < n; ++i) {
            acc[i] += a * z.imag();
            z *= w;
            if ((i & 1023) == 1023) {
                z /= std::abs(z);
            }
        }
    }

    Eigen::VectorXf env = Eigen::VectorXf::Ones(n);
    const double fade = kFadeMs * rate_hz / 1000.0;
    for (const auto& gap : gaps) {
        const Eigen::Index s = std::clamp<Eigen::Index>(sample_at(gap.start_ms, rate_hz), 0, n);
        const Eigen::Index e = std::clamp<Eigen::Index>(sample_at(gap.end_ms, rate_hz), 0, n);
        env.segment(s, e - s).setZero();
        for (Eigen::Index i = 1; i <= static_cast<Eigen::Index>(fade); ++i) {
            const auto ramp = static_cast<float>(1.0 - static_cast<double>(i) / fade);
            if (s - i >= 0) {
                env[s - i] = std::min(env[s - i], 1.0f - ramp);
            }
            if (e + i - 1 < n) {
                env[e + i - 1] = std::min(env[e + i - 1], 1.0f - ramp);
            }
        }
    }
    return acc.cast<float>().cwiseProduct(env);
}

nlohmann::json profile_json(const ActivityProfile& p) {
    return {
        {"label", p.label},
        {"audio_band", {p.audio_band.lo_hz, p.audio_band.hi_hz}},
        {"audio_amplitude", p.audio_amplitude},
        {"imu",
         {{"freq_hz", p.imu.freq_hz},
          {"amplitude", p.imu.amplitude},
          {"axis_gain", {p.imu.axis_gain[0], p.imu.axis_gain[1], p.imu.axis_gain[2]}},
          {"phase", {p.imu.phase[0], p.imu.phase[1], p.imu.phase[2]}},
          {"jitter_sd", p.imu.jitter_sd}}},
        {"auxiliary_freq_hz", p.auxiliary_freq_hz},
        {"mean_gap_s", p.mean_gap_s},
        {"gap_rate_per_min", p.gap_rate_per_min},
        {"transition_lead_ms", p.transition_lead_ms},
    };
}

} // namespace

void ActivityProfile::validate(double audio_rate_hz) const {
    if (label.empty() || label == kAuxiliaryLabel) {
        throw ValidationError("invalid activity label '" + label + "'");
    }
    if (!(audio_band.lo_hz > 0.0 && audio_band.lo_hz < audio_band.hi_hz && audio_band.hi_hz < audio_rate_hz / 2.0)) {
        throw ValidationError("audio band of '" + label + "' must satisfy 0 < lo < hi < rate/2");
    }
    if (!(audio_amplitude >= 0.0 && imu.amplitude >= 0.0 && imu.jitter_sd >= 0.0)) {
        throw ValidationError("amplitudes of '" + label + "' must be non-negative");
    }
    if (!(imu.freq_hz > 0.0 && auxiliary_freq_hz > 0.0)) {
        throw ValidationError("imu frequencies of '" + label + "' must be positive");
    }
    if (!(mean_gap_s >= 0.0 && gap_rate_per_min >= 0.0 && transition_lead_ms >= 0.0)) {
        throw ValidationError("gap parameters of '" + label + "' must be non-negative");
    }
    if (2.0 * transition_lead_ms >= kMinGapMs) {
        throw ValidationError("transition_lead_ms too long for the shortest stop");
    }
}

void SynthConfig::validate() const {
    if (!(duration_s >= 60.0)) {
        throw ValidationError("duration_s must be at least 60");
    }
    if (users[0].empty() || users[1].empty() || users[0] == users[1]) {
        throw ValidationError("user ids must be distinct and non-empty");
    }
    if (!(audio_rate_hz >= 8000.0 && imu_rate_hz > 0.0)) {
        throw ValidationError("invalid sampling rates");
    }
    if (!(noise_floor >= 0.0 && spurious_event_rate >= 0.0 && burst_amplitude >= 0.0)) {
        throw ValidationError("noise parameters must be non-negative");
    }
    for (const auto& p : profiles) {
        p.validate(audio_rate_hz);
    }
    if (profiles[0].label == profiles[1].label) {
        throw ValidationError("both users share the activity '" + profiles[0].label + "'");
    }
    if (profiles[0].gap_rate_per_min == 0.0 && profiles[1].gap_rate_per_min == 0.0) {
        throw ValidationError("neither user ever stops; the scenario has no acoustic gaps");
    }
}

SynthConfig preset(const std::string& name, double duration_s, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.duration_s = duration_s;
    cfg.rng_seed = seed;
    auto& a = cfg.profiles[0];
    auto& b = cfg.profiles[1];
    if (name == "workshop") {
        a.label = "hammer";
        a.audio_band = {200.0, 400.0};
        a.imu.freq_hz = 2.0;
        a.imu.amplitude = 4.0;
        b.label = "saw";
        b.audio_band = {2500.0, 3500.0};
        b.imu.freq_hz = 4.0;
        b.imu.amplitude = 3.0;
        b.imu.phase = {0.5, 2.0, 1.2};
        for (auto* p : {&a, &b}) {
            p->mean_gap_s = 2.0;
            p->gap_rate_per_min = 1.5;
        }
    } else if (name == "kitchen") {
        a.label = "chopping";
        a.audio_band = {1000.0, 1600.0};
        a.imu.freq_hz = 4.0;
        a.imu.amplitude = 3.5;
        b.label = "cooking";
        b.audio_band = {5000.0, 7000.0};
        b.imu.freq_hz = 2.0;
        b.imu.amplitude = 2.0;
        b.imu.axis_gain = {0.6, 1.0, 0.4};
        for (auto* p : {&a, &b}) {
            p->mean_gap_s = 8.0;
            p->gap_rate_per_min = 2.0;
        }
    } else {
        throw ValidationError("unknown preset '" + name + "' (expected workshop or kitchen)");
    }
    for (auto* p : {&a, &b}) {
        p->audio_amplitude = 0.1;
        p->auxiliary_freq_hz = 6.0;
    }
    return cfg;
}

std::map<ActivityLabel, FrequencyBand> preset_bands(const SynthConfig& cfg) {
    return {{cfg.profiles[0].label, cfg.profiles[0].audio_band}, {cfg.profiles[1].label, cfg.profiles[1].audio_band}};
}

LabelSpace label_space(const SynthConfig& cfg) { return LabelSpace({cfg.profiles[0].label, cfg.profiles[1].label}); }

std::vector<TruthRecord> draw_schedule(const ActivityProfile& p, const std::string& user, double duration_ms,
                                       std::uint64_t seed, const std::vector<Interval>& blocked, double margin_ms) {
    std::vector<TruthRecord> out;
    if (p.gap_rate_per_min <= 0.0) {
        out.push_back({user, {0.0, duration_ms}, p.label, ActivityKind::primary});
        return out;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> spread(0.5, 1.5);
    std::exponential_distribution<double> gap_len(p.mean_gap_s > 0.0 ? 1.0 / p.mean_gap_s : 1e9);
    const double mean_run_ms = std::max(1.0, 60.0 / p.gap_rate_per_min - p.mean_gap_s) * 1000.0;

    double t = 0.0;
    while (true) {
        // Whole milliseconds, so stop lengths survive the subtraction exactly.
        double gs = std::ceil(t + mean_run_ms * spread(rng));
        const double len = std::ceil(std::max(kMinGapMs, gap_len(rng) * 1000.0));
        for (const auto& b : blocked) {
            if (gs < b.end_ms + margin_ms && b.start_ms - margin_ms < gs + len) {
                gs = std::ceil(b.end_ms + margin_ms);
            }
        }
        const double ge = gs + len;
        if (ge > duration_ms - 1000.0) {
            break;
        }
        out.push_back({user, {t, gs}, p.label, ActivityKind::primary});
        out.push_back({user, {gs, ge}, kAuxiliaryLabel, ActivityKind::auxiliary});
        t = ge;
    }
    out.push_back({user, {t, duration_ms}, p.label, ActivityKind::primary});
    return out;
}

SoloScenario generate_solo(const SynthConfig& cfg, int which) {
    cfg.validate();
    if (which != 0 && which != 1) {
        throw RangeError("profile index must be 0 or 1");
    }
    const auto& p = cfg.profiles[static_cast<std::size_t>(which)];
    const auto& user = cfg.users[static_cast<std::size_t>(which)];
    const double duration_ms = cfg.duration_s * 1000.0;

    SoloScenario out;
    auto sched_rng = rng_for(cfg.rng_seed, Stream::schedule, which);
    out.truth = draw_schedule(p, user, duration_ms, sched_rng());
    const auto gaps = gaps_of(out.truth);
    out.imu = render_imu(p, user, gaps, duration_ms, cfg.imu_rate_hz, cfg.rng_seed, which);
    const auto n = static_cast<Eigen::Index>(std::floor(duration_ms * cfg.audio_rate_hz / 1000.0));
    Eigen::VectorXf audio = render_source(p, gaps, n, cfg.audio_rate_hz, cfg.rng_seed, which);
    audio = audio.unaryExpr([](float x) { return quantize_pcm16(soft_limit(x)); });
    out.audio = AudioStream(std::move(audio), cfg.audio_rate_hz, 0.0);
    return out;
}

Scenario generate(const SynthConfig& cfg) {
    cfg.validate();
    const double duration_ms = cfg.duration_s * 1000.0;
    const auto n = static_cast<Eigen::Index>(std::floor(duration_ms * cfg.audio_rate_hz / 1000.0));

    Scenario scn;
    scn.horizon_ms = duration_ms;
    Eigen::VectorXf mix = Eigen::VectorXf::Zero(n);
    std::size_t total_gaps = 0;
    std::vector<Interval> blocked;
    for (int u = 0; u < 2; ++u) {
        const auto& p = cfg.profiles[static_cast<std::size_t>(u)];
        const auto& user = cfg.users[static_cast<std::size_t>(u)];
        auto sched_rng = rng_for(cfg.rng_seed, Stream::schedule, u);
        auto truth = cfg.stop_margin_ms >= 0.0
                         ? draw_schedule(p, user, duration_ms, sched_rng(), blocked, cfg.stop_margin_ms)
                         : draw_schedule(p, user, duration_ms, sched_rng());
        const auto gaps = gaps_of(truth);
        blocked = gaps;
        total_gaps += gaps.size();
        (u == 0 ? scn.imu_a : scn.imu_b) = render_imu(p, user, gaps, duration_ms, cfg.imu_rate_hz, cfg.rng_seed, u);
        mix += render_source(p, gaps, n, cfg.audio_rate_hz, cfg.rng_seed, u);
        scn.ground_truth.insert(scn.ground_truth.end(), truth.begin(), truth.end());
    }
    if (total_gaps == 0) {
        throw ValidationError("configuration produced no stops for either user");
    }

    if (cfg.noise_floor > 0.0) {
        auto rng = rng_for(cfg.rng_seed, Stream::noise);
        std::normal_distribution<float> noise(0.0f, static_cast<float>(cfg.noise_floor));
        for (Eigen::Index i = 0; i < n; ++i) {
            mix[i] += noise(rng);
        }
    }
    if (cfg.spurious_event_rate > 0.0 && cfg.burst_amplitude > 0.0) {
        auto rng = rng_for(cfg.rng_seed, Stream::bursts);
        std::poisson_distribution<int> count(cfg.spurious_event_rate * cfg.duration_s / 60.0);
        std::uniform_real_distribution<double> at(0.0, std::max(0.0, duration_ms - kBurstMs));
        std::normal_distribution<float> white(0.0f, static_cast<float>(cfg.burst_amplitude));
        const Eigen::Index len = sample_at(kBurstMs, cfg.audio_rate_hz);
        for (int b = count(rng); b > 0; --b) {
            const Eigen::Index s = sample_at(at(rng), cfg.audio_rate_hz);
            for (Eigen::Index i = 0; i < len && s + i < n; ++i) {
                const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / len);
                mix[s + i] += static_cast<float>(w) * white(rng);
            }
        }
    }
    mix = mix.unaryExpr([](float x) { return quantize_pcm16(soft_limit(x)); });
    scn.audio = AudioStream(std::move(mix), cfg.audio_rate_hz, 0.0);
    std::stable_sort(scn.ground_truth.begin(), scn.ground_truth.end(), [](const TruthRecord& a, const TruthRecord& b) {
        return a.interval.start_ms < b.interval.start_ms;
    });
    scn.validate();
    return scn;
}

Scenario augment_pair(const SoloScenario& a, const SoloScenario& b) {
    if (a.truth.empty() || b.truth.empty()) {
        throw ValidationError("augmentation needs ground truth for both recordings");
    }
    if (a.audio.rate_hz != b.audio.rate_hz) {
        throw ValidationError("audio sampling rates differ");
    }
    if (a.imu.user_id == b.imu.user_id) {
        throw ValidationError("both recordings belong to user '" + a.imu.user_id + "'");
    }
    for (const auto* s : {&a, &b}) {
        for (const auto& r : s->truth) {
            if (r.user != s->imu.user_id) {
                throw ValidationError("recording of '" + s->imu.user_id + "' carries truth for '" + r.user + "'");
            }
        }
    }

    Scenario scn;
    scn.imu_a = a.imu;
    scn.imu_b = b.imu;
    scn.ground_truth = a.truth;
    scn.ground_truth.insert(scn.ground_truth.end(), b.truth.begin(), b.truth.end());

    const double rate = a.audio.rate_hz;
    const double t0 = std::min(a.audio.t0_ms, b.audio.t0_ms);
    const Eigen::Index off_a = sample_at(a.audio.t0_ms - t0, rate);
    const Eigen::Index off_b = sample_at(b.audio.t0_ms - t0, rate);
    const Eigen::Index n = std::max(off_a + a.audio.size(), off_b + b.audio.size());
    Eigen::VectorXf mix = Eigen::VectorXf::Zero(n);
    mix.segment(off_a, a.audio.size()) += a.audio.samples;
    mix.segment(off_b, b.audio.size()) += b.audio.samples;
    scn.audio = AudioStream(mix.unaryExpr([](float x) { return quantize_pcm16(soft_limit(x)); }), rate, t0);

    rebase_to_earliest(scn.imu_a, scn.imu_b, scn.audio, &scn.ground_truth);
    scn.horizon_ms = std::min({scn.imu_a.span().end_ms, scn.imu_b.span().end_ms, scn.audio.span().end_ms});
    std::stable_sort(scn.ground_truth.begin(), scn.ground_truth.end(), [](const TruthRecord& x, const TruthRecord& y) {
        return x.interval.start_ms < y.interval.start_ms;
    });
    scn.validate();
    return scn;
}

float soft_limit(float x, float knee) {
    const float m = std::abs(x);
    if (m <= knee) {
        return x;
    }
    const float room = 1.0f - knee;
    return std::copysign(knee + room * std::tanh((m - knee) / room), x);
}

std::string synth_config_json(const SynthConfig& cfg) {
    const nlohmann::json j = {
        {"duration_s", cfg.duration_s},
        {"users", {cfg.users[0], cfg.users[1]}},
        {"profiles", {profile_json(cfg.profiles[0]), profile_json(cfg.profiles[1])}},
        {"noise_floor", cfg.noise_floor},
        {"spurious_event_rate", cfg.spurious_event_rate},
        {"burst_amplitude", cfg.burst_amplitude},
        {"audio_rate_hz", cfg.audio_rate_hz},
        {"imu_rate_hz", cfg.imu_rate_hz},
        {"stop_margin_ms", cfg.stop_margin_ms},
        {"rng_seed", cfg.rng_seed},
    };
    return j.dump(2) + "\n";
}

} // namespace gapsense

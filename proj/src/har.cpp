#include "gapsense/har.h"

#include <algorithm>
#include <bit>
#include <random>
#include <set>

namespace gapsense {

std::optional<LabelConfidence> HarPrediction::top_in(const LabelSpace& space) const {
    for (const auto& lc : labels) {
        if (space.contains(lc.label)) {
            return lc;
        }
    }
    return std::nullopt;
}

double HarPrediction::confidence_of(const ActivityLabel& label) const {
    for (const auto& lc : labels) {
        if (lc.label == label) {
            return lc.confidence;
        }
    }
    return 0.0;
}

void HarPrediction::sort() {
    std::sort(labels.begin(), labels.end(), [](const LabelConfidence& a, const LabelConfidence& b) {
        if (a.confidence != b.confidence) {
            return a.confidence > b.confidence;
        }
        return a.label < b.label;
    });
}

// ---------------------------------------------------------------------------

OracleBackend::OracleBackend(std::vector<TruthRecord> truth, double horizon_ms, double noise_rate,
                             std::uint64_t rng_seed, std::vector<ActivityLabel> noise_labels)
    : truth_(std::move(truth)), horizon_ms_(horizon_ms), noise_rate_(noise_rate), seed_(rng_seed) {
    if (truth_.empty()) {
        throw ValidationError("oracle backend needs ground truth");
    }
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
        throw ValidationError("noise_rate must lie in [0, 1]");
    }
    std::set<ActivityLabel> seen;
    for (const auto& r : truth_) {
        if (r.kind == ActivityKind::primary && seen.insert(r.label).second) {
            labels_.push_back(r.label);
        }
    }
    for (auto& l : noise_labels) {
        if (seen.insert(l).second) {
            labels_.push_back(std::move(l));
        }
    }
}

HarPrediction OracleBackend::classify(const AudioStream& segment) const {
    const double dur = segment.duration_ms();
    const double tol = 1000.0 / segment.rate_hz;
    if (segment.t0_ms < -tol || segment.t0_ms + dur > horizon_ms_ + tol) {
        throw RangeError("oracle query outside the scenario horizon");
    }
    HarPrediction out;
    if (dur <= 0.0) {
        return out;
    }
    const Interval w(segment.t0_ms, segment.t0_ms + dur);

    std::map<std::pair<std::string, ActivityLabel>, double> per_user;
    for (const auto& r : truth_) {
        if (r.kind == ActivityKind::primary) {
            per_user[{r.user, r.label}] += r.interval.overlap(w);
        }
    }
    std::map<ActivityLabel, double> per_label;
    for (const auto& [key, ov] : per_user) {
        auto& c = per_label[key.second];
        c = std::max(c, std::min(1.0, ov / dur));
    }
    for (const auto& [label, c] : per_label) {
        if (c > 0.0) {
            out.labels.push_back({label, c});
        }
    }

    // Seeded by the query itself so results do not depend on call order.
    std::uint64_t h = seed_ ^ 0x9E3779B97F4A7C15ull;
    h ^= std::bit_cast<std::uint64_t>(segment.t0_ms) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(segment.size()) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    std::mt19937_64 rng(h);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < noise_rate_) {
        std::vector<ActivityLabel> candidates;
        for (const auto& l : labels_) {
            if (!per_label.count(l) || per_label.at(l) <= 0.0) {
                candidates.push_back(l);
            }
        }
        if (!candidates.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
            const auto& label = candidates[pick(rng)];
            out.labels.push_back({label, 0.05 + 0.25 * unit(rng)});
        }
    }
    out.sort();
    return out;
}

// ---------------------------------------------------------------------------

BandEnergyBackend::BandEnergyBackend(std::map<ActivityLabel, FrequencyBand> profiles, double threshold, int fft_len)
    : profiles_(std::move(profiles)), threshold_(threshold), fft_len_(fft_len) {
    if (profiles_.empty()) {
        throw ValidationError("band-energy backend needs at least one profile");
    }
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ValidationError("band-energy threshold must lie in (0, 1]");
    }
    std::vector<FrequencyBand> bands;
    for (const auto& [label, band] : profiles_) {
        if (!(band.lo_hz >= 0.0 && band.lo_hz < band.hi_hz)) {
            throw ValidationError("invalid band for '" + label + "'");
        }
        bands.push_back(band);
        labels_.push_back(label);
    }
    std::sort(bands.begin(), bands.end(), [](const auto& a, const auto& b) { return a.lo_hz < b.lo_hz; });
    for (std::size_t i = 1; i < bands.size(); ++i) {
        if (bands[i].lo_hz <= bands[i - 1].hi_hz) {
            throw ValidationError("band-energy profiles must be disjoint");
        }
    }
}

std::vector<std::pair<ActivityLabel, double>> BandEnergyBackend::band_fractions(const AudioStream& segment) const {
    std::vector<std::pair<ActivityLabel, double>> out;
    if (segment.size() < 2) {
        return out;
    }
    const WelchOptions opt{fft_len_, 0.5};
    const BlockSpectra<float> spectra(segment.samples, segment.rate_hz, opt);
    if (spectra.silent()) {
        return out;
    }
    const Eigen::VectorXf psd = spectra.cross(spectra).real();
    const double total = psd.cast<double>().sum();
    if (!(total > 0.0)) {
        return out;
    }
    const double bin_hz = spectra.bin_hz();
    for (const auto& [label, band] : profiles_) {
        const auto lo = static_cast<Eigen::Index>(std::ceil(band.lo_hz / bin_hz));
        const auto hi = std::min<Eigen::Index>(psd.size() - 1, static_cast<Eigen::Index>(std::floor(band.hi_hz / bin_hz)));
        double e = 0.0;
        for (Eigen::Index k = lo; k <= hi; ++k) {
            e += psd[k];
        }
        out.emplace_back(label, std::clamp(e / total, 0.0, 1.0));
    }
    return out;
}

HarPrediction BandEnergyBackend::classify(const AudioStream& segment) const {
    HarPrediction out;
    for (const auto& [label, fraction] : band_fractions(segment)) {
        if (fraction >= threshold_) {
            out.labels.push_back({label, fraction});
        }
    }
    out.sort();
    return out;
}

std::unique_ptr<HarBackend> oracle_backend(const Scenario& scn, double noise_rate, std::uint64_t rng_seed) {
    if (!scn.has_truth()) {
        throw ValidationError("oracle backend needs a scenario with ground truth");
    }
    return std::make_unique<OracleBackend>(scn.ground_truth, scn.horizon_ms, noise_rate, rng_seed);
}

std::unique_ptr<HarBackend> bandenergy_backend(std::map<ActivityLabel, FrequencyBand> profiles, double threshold) {
    return std::make_unique<BandEnergyBackend>(std::move(profiles), threshold);
}

} // namespace gapsense

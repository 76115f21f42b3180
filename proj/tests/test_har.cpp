#include "doctest.h"

#include "oracles.h"
#include "test_util.h"

#include "gapsense/har.h"

#include <set>

using namespace gapsense;

namespace {

const std::vector<TruthRecord> kTruth{
    {"U1", {0.0, 10000.0}, "hammer", ActivityKind::primary},
    {"U1", {10000.0, 14000.0}, "auxiliary", ActivityKind::auxiliary},
    {"U1", {14000.0, 30000.0}, "hammer", ActivityKind::primary},
    {"U2", {0.0, 12000.0}, "cooking", ActivityKind::primary},
    {"U2", {12000.0, 30000.0}, "saw", ActivityKind::primary},
};

AudioStream window(double start_ms, double end_ms) {
    return AudioStream(Eigen::VectorXf::Zero(static_cast<Eigen::Index>((end_ms - start_ms) * 8.0)), 8000.0, start_ms);
}

const std::map<ActivityLabel, FrequencyBand> kBands{{"hammer", {200.0, 400.0}}, {"saw", {2500.0, 3500.0}}};

} // namespace

TEST_SUITE("har") {

TEST_CASE("oracle: one user sounding") {
    const OracleBackend b(kTruth, 30000.0, 0.0, 1);
    const HarPrediction p = b.classify(window(10500.0, 11500.0));
    REQUIRE(p.labels.size() == 1);
    CHECK(p.labels[0] == LabelConfidence{"cooking", 1.0});
}

TEST_CASE("oracle: two activities with overlap fractions") {
    const OracleBackend b(kTruth, 30000.0, 0.0, 1);
    const HarPrediction p = b.classify(window(13000.0, 15000.0));
    CHECK(p.confidence_of("saw") == doctest::Approx(1.0));
    CHECK(p.confidence_of("hammer") == doctest::Approx(0.5));
    CHECK(p.confidence_of("auxiliary") == 0.0);
    REQUIRE(p.labels.size() == 2);
    CHECK(p.labels[0].label == "saw");
}

TEST_CASE("oracle: noise_rate 1 always adds one spurious label") {
    const OracleBackend b(kTruth, 30000.0, 1.0, 7);
    for (int i = 0; i < 50; ++i) {
        const double s = 500.0 * i;
        const HarPrediction p = b.classify(window(s, s + 1000.0));
        std::set<ActivityLabel> truth_labels;
        for (const auto& r : kTruth) {
            if (r.kind == ActivityKind::primary && r.interval.intersects({s, s + 1000.0})) {
                truth_labels.insert(r.label);
            }
        }
        int extra = 0;
        for (const auto& lc : p.labels) {
            if (!truth_labels.count(lc.label)) {
                ++extra;
                CHECK(lc.confidence <= 0.3);
                CHECK(lc.confidence > 0.0);
            }
        }
        CHECK(extra == 1);
    }
}

TEST_CASE("oracle: deterministic and bounded by the horizon") {
    const OracleBackend a(kTruth, 30000.0, 0.5, 3), b(kTruth, 30000.0, 0.5, 3);
    for (int i = 0; i < 20; ++i) {
        const AudioStream w = window(1000.0 * i, 1000.0 * i + 1000.0);
        CHECK(a.classify(w).labels == b.classify(w).labels);
    }
    CHECK_THROWS_AS((void)a.classify(window(29500.0, 30500.0)), RangeError);
    CHECK_THROWS_AS(OracleBackend({}, 30000.0, 0.1, 1), ValidationError);
}

TEST_CASE("band energy: a 300 Hz tone is hammering") {
    const BandEnergyBackend b(kBands, 0.2);
    const HarPrediction p = b.classify(AudioStream(testutil::tones({{300.0, 0.3}}, 44100, 44100.0), 44100.0));
    REQUIRE(p.labels.size() == 1);
    CHECK(p.labels[0].label == "hammer");
    CHECK(p.labels[0].confidence == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("band energy: mixed tones split by their energy") {
    const double rate = 44100.0;
    const Eigen::Index n = 11025;
    const Eigen::VectorXf x = testutil::tones({{300.0, 0.3}, {3000.0, 0.2}}, n, rate);
    const BandEnergyBackend b(kBands, 0.2);
    const HarPrediction p = b.classify(AudioStream(x, rate));
    const std::vector<double> xs(x.data(), x.data() + n);
    const auto ref = oracle::dft_band_fractions(xs, rate, {{"hammer", {200.0, 400.0}}, {"saw", {2500.0, 3500.0}}});
    REQUIRE(p.labels.size() == 2);
    CHECK(p.confidence_of("hammer") == doctest::Approx(ref.at("hammer")).epsilon(0.01));
    CHECK(p.confidence_of("saw") == doctest::Approx(ref.at("saw")).epsilon(0.01));
    CHECK(p.confidence_of("hammer") + p.confidence_of("saw") == doctest::Approx(1.0).epsilon(0.01));
    CHECK(ref.at("hammer") == doctest::Approx(0.09 / 0.13).epsilon(0.001));
}

TEST_CASE("band energy: silence and empty segments give nothing") {
    const BandEnergyBackend b(kBands, 0.2);
    CHECK(b.classify(AudioStream(Eigen::VectorXf::Zero(44100), 44100.0)).empty());
    CHECK(b.classify(AudioStream(Eigen::VectorXf(), 44100.0)).empty());
}

TEST_CASE("band energy: amplitude does not matter") {
    const BandEnergyBackend b(kBands, 0.2);
    const Eigen::VectorXf x = testutil::tones({{300.0, 0.3}, {3000.0, 0.2}}, 44100, 44100.0) +
                              testutil::white(44100, 0.02, 4);
    const HarPrediction p = b.classify(AudioStream(x, 44100.0));
    const HarPrediction q = b.classify(AudioStream(x * 0.01f, 44100.0));
    REQUIRE(p.labels.size() == q.labels.size());
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
        CHECK(p.labels[i].label == q.labels[i].label);
        CHECK(p.labels[i].confidence == doctest::Approx(q.labels[i].confidence).epsilon(1e-5));
    }
}

TEST_CASE("band energy: overlapping bands are rejected") {
    CHECK_THROWS_AS(BandEnergyBackend({{"a", {100.0, 500.0}}, {"b", {400.0, 800.0}}}, 0.2), ValidationError);
    CHECK_THROWS_AS(BandEnergyBackend(kBands, 0.0), ValidationError);
}

TEST_CASE("top_in keeps only configured labels") {
    HarPrediction p;
    p.labels = {{"speech", 0.9}, {"saw", 0.4}, {"hammer", 0.2}};
    const auto top = p.top_in(LabelSpace({"hammer", "saw"}));
    REQUIRE(top);
    CHECK(top->label == "saw");
    CHECK_FALSE(p.top_in(LabelSpace({"cooking"})));
}

}

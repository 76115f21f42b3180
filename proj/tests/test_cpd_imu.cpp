#include "doctest.h"

#include "oracles.h"
#include "test_util.h"

#include "gapsense/cluster1d.h"
#include "gapsense/cpd_imu.h"
#include "gapsense/rulsif.h"

#include <Eigen/Dense>

#include <random>

using namespace gapsense;

TEST_SUITE("cpd-imu") {

TEST_CASE("imu_windows splits into whole windows") {
    CpdConfig cfg;
    CHECK(imu_windows(testutil::noise_imu("U1", 5000, 1), cfg).size() == 200);
    CHECK(imu_windows(testutil::noise_imu("U1", 5010, 1), cfg).size() == 200);
    const auto one = imu_windows(testutil::noise_imu("U1", 30, 1), cfg);
    REQUIRE(one.size() == 1);
    CHECK(one[0].flattened().size() == 75);
    CHECK(one[0].span == Interval(0.0, 500.0));
    CHECK_THROWS_AS((void)imu_windows(testutil::noise_imu("U1", 24, 1), cfg), SizeError);
}

TEST_CASE("identical constant windows score 0 and are flagged degenerate") {
    const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(3, 50, 9.81);
    const PeScore s = pe_divergence_score(c, c, RatioFitOptions{});
    CHECK(s.value == 0.0);
    CHECK(s.degenerate);
}

TEST_CASE("non-finite samples are rejected") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 20);
    a(1, 4) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)pe_divergence_score(a, Eigen::MatrixXd::Random(3, 20), RatioFitOptions{}), ValidationError);
}

TEST_CASE("shifted clusters score far above same-distribution sets") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.1));
    const auto draw = [&](double mean) {
        Eigen::MatrixXd m(3, 1250);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = mean + nd(rng);
        }
        return m;
    };
    const Eigen::MatrixXd a = draw(0.0), b = draw(5.0), a2 = draw(0.0);
    const double shifted = pe_divergence_score(a, b, RatioFitOptions{}).value;
    const double same = pe_divergence_score(a, a2, RatioFitOptions{}).value;
    CHECK(shifted >= 10.0 * same);
    // Disjoint supports: each direction tends to (1/alpha - 1) / 2.
    CHECK(shifted == doctest::Approx(9.0).epsilon(0.15));
}

TEST_CASE("alpha = 0 matches the closed-form unconstrained fit") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd x(3, 60), y(3, 70);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = nd(rng);
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y.data()[i] = 0.7 + 1.3 * nd(rng);
    }
    RatioFitOptions opt;
    opt.alpha = 0.0;
    opt.rng_seed = 4;
    const RatioFit fit = fit_relative_density_ratio(x, y, opt);

    // Direct evaluation with the selected kernel width and regularizer.
    const auto kernel = [&](const Eigen::MatrixXd& s) {
        Eigen::MatrixXd k(s.cols(), fit.centers.cols());
        for (Eigen::Index i = 0; i < s.cols(); ++i) {
            for (Eigen::Index l = 0; l < fit.centers.cols(); ++l) {
                k(i, l) = std::exp(-(s.col(i) - fit.centers.col(l)).squaredNorm() / (2.0 * fit.sigma * fit.sigma));
            }
        }
        return k;
    };
    const Eigen::MatrixXd kx = kernel(x), ky = kernel(y);
    const Eigen::MatrixXd h = ky.transpose() * ky / static_cast<double>(y.cols()) +
                              fit.lambda * Eigen::MatrixXd::Identity(fit.centers.cols(), fit.centers.cols());
    const Eigen::VectorXd rhs = kx.colwise().mean().transpose();
    const Eigen::VectorXd theta = h.ldlt().solve(rhs);
    const Eigen::VectorXd gx = kx * theta, gy = ky * theta;
    const double pe = -0.5 * gy.squaredNorm() / static_cast<double>(y.cols()) + gx.mean() - 0.5;

    CHECK((fit.theta - theta).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, theta.cwiseAbs().maxCoeff()));
    CHECK(fit.pe == doctest::Approx(pe).epsilon(1e-6));
    CHECK(relative_pearson_divergence(x, y, opt) == doctest::Approx(pe).epsilon(1e-6));
}

TEST_CASE("constant stream scores vanish") {
    const ImuStream s = testutil::make_imu("U1", 1000, [](int) { return Eigen::Vector3d(0.1, -0.2, 9.81); });
    const ScoreSeries scores = imu_change_scores(s, CpdConfig{});
    REQUIRE(scores.size() == 39);
    CHECK(scores.score.maxCoeff() <= 1e-6);
    CHECK(demarcate_changes(scores).degenerate);
}

TEST_CASE("a planted step is found where the window means differ most") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd(0.0, 0.5);
    const ImuStream s = testutil::make_imu("U1", 3000, [&](int k) {
        const double step = k >= 1500 ? 2.0 : 0.0;
        return Eigen::Vector3d(step + nd(rng), nd(rng), 9.81 + 0.5 * step + nd(rng));
    });
    const ScoreSeries scores = imu_change_scores(s, CpdConfig{});
    Eigen::Index best = 0;
    scores.score.maxCoeff(&best);
    CHECK(std::abs(scores.t_ms[best] - 30000.0) <= 1000.0);

    // Reference location: largest jump between consecutive window means.
    const auto windows = imu_windows(s, CpdConfig{});
    double jump = -1.0;
    double at = 0.0;
    for (std::size_t i = 1; i < windows.size(); ++i) {
        const double d = (windows[i].samples.rowwise().mean() - windows[i - 1].samples.rowwise().mean()).norm();
        if (d > jump) {
            jump = d;
            at = windows[i].span.start_ms;
        }
    }
    CHECK(std::abs(scores.t_ms[best] - at) <= 1000.0);
    const ChangeTimeline tl = demarcate_changes(scores, "U1");
    CHECK(tl.any_intersects({29500.0, 30500.0}));
}

TEST_CASE("group size 10 over 200 windows gives 181 scores") {
    CpdConfig cfg;
    cfg.group_size = 10;
    cfg.ratio.n_kernel_centers = 20;
    cfg.ratio.cv_folds = 2;
    const ScoreSeries scores = imu_change_scores(testutil::noise_imu("U1", 5000, 2), cfg);
    CHECK(scores.size() == 181);
    CHECK(scores.score.minCoeff() >= 0.0);
}

TEST_CASE("demarcation flags the high cluster") {
    ScoreSeries s;
    s.step_ms = 500.0;
    s.t_ms = Eigen::VectorXd::LinSpaced(5, 500.0, 2500.0);
    s.score.resize(5);
    s.score << 0.0, 0.0, 0.0, 10.0, 10.0;
    s.degenerate.assign(5, false);
    const ChangeTimeline tl = demarcate_changes(s, "U1");
    REQUIRE(tl.changes.size() == 1);
    CHECK(tl.changes[0] == Interval(1750.0, 2750.0));
    CHECK_FALSE(tl.any_intersects({1000.0, 1500.0}));

    s.score.setZero();
    const ChangeTimeline flat = demarcate_changes(s, "U1");
    CHECK(flat.degenerate);
    CHECK(flat.changes.empty());
}

TEST_CASE("2-means on two tight blobs equals the exhaustive sweep") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> lo(1.0, 0.1), hi(9.0, 0.1);
    std::vector<double> v;
    for (int i = 0; i < 40; ++i) {
        v.push_back(i % 3 ? lo(rng) : hi(rng));
    }
    const auto ours = two_means_1d(Eigen::Map<const Eigen::VectorXd>(v.data(), 40));
    const auto ref = oracle::exhaustive_two_means(v);
    CHECK(ours.high == ref.high);
    CHECK(ours.sse == doctest::Approx(ref.sse));
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(ours.high[i] == (v[i] > 5.0));
    }
}

TEST_CASE("invalid configurations are rejected") {
    CpdConfig cfg;
    cfg.window_len = 1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.ratio.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.ratio.lambda_candidates.clear();
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

}

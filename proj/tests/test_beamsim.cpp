#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>

#include "sonosim/beamsim.hpp"
#include "sonosim/rf_io.hpp"

using namespace sonosim;

namespace {

Phantom single_scatterer(const Vec3& p, double amplitude = 1.0) {
    Phantom ph;
    ph.positions = {p};
    ph.amplitudes = {amplitude};
    return ph;
}

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Support of |p| above 1% of peak.
std::size_t support(const std::vector<double>& p) {
    std::size_t first = p.size(), last = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (std::abs(p[i]) > 0.01) first = std::min(first, i), last = i;
    return last - first + 1;
}

}  // namespace

TEST(Pulse, UnitPeakAtCenter) {
    const AcousticConfig cfg;
    const auto p = pulse_waveform(cfg);
    const std::size_t h = pulse_half_width(cfg);
    ASSERT_EQ(p.size(), 2 * h + 1);
    EXPECT_EQ(p[h], 1.0);
    for (double v : p) EXPECT_LE(std::abs(v), 1.0);
}

TEST(Pulse, SpectrumPeaksAtCenterFrequency) {
    const AcousticConfig cfg;
    const auto p = pulse_waveform(cfg);
    // Direct DFT oracle on a zero-padded length.
    const std::size_t n = 10000;
    const double bin = cfg.sampling_frequency / static_cast<double>(n);
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < p.size(); ++t)
            acc += p[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n));
        if (std::abs(acc) > best_mag) best_mag = std::abs(acc), best = k;
    }
    EXPECT_NEAR(static_cast<double>(best) * bin, cfg.center_frequency, bin);
}

TEST(Pulse, DoublingBandwidthHalvesSupport) {
    AcousticConfig a;
    AcousticConfig b;
    b.fractional_bandwidth = 2.0 * a.fractional_bandwidth;
    const double ratio = static_cast<double>(support(pulse_waveform(a))) / static_cast<double>(support(pulse_waveform(b)));
    EXPECT_NEAR(ratio, 2.0, 0.4);
}

TEST(AcousticConfig, RejectsUndersampling) {
    AcousticConfig cfg;
    cfg.sampling_frequency = 7e6;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg = {};
    cfg.n_lines = 0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg = {};
    cfg.dynamic_range_db = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
}

TEST(Rf, FrameLengthCoversDeepestEcho) {
    const PhantomConfig pc;
    const AcousticConfig ac;
    const auto n = rf_sample_count(pc, ac);
    EXPECT_GE(n, static_cast<std::size_t>(std::llround(2.0 * 0.090 / 1540.0 * 1e8)));
}

TEST(Rf, SingleScattererAtStandoffPeaksAtTimeOfFlight) {
    const AcousticConfig cfg;
    Phantom ph = single_scatterer({first_line_for(PhantomConfig{}, cfg) + 20 * line_pitch_for(PhantomConfig{}, cfg), 0.0, 30.0});
    const RfFrame rf = synthesize_rf(ph, cfg);
    const RealImage env = envelope_detect(rf);
    const std::size_t expected = 3896;  // round(2 * 0.030 / 1540 * 1e8)
    EXPECT_EQ(expected, static_cast<std::size_t>(std::llround(2.0 * 0.030 / 1540.0 * 1e8)));
    const auto peak = argmax(env.row(20));
    EXPECT_LE(std::abs(static_cast<double>(peak) - static_cast<double>(expected)),
              static_cast<double>(pulse_half_width(cfg)));
    EXPECT_LE(std::abs(static_cast<double>(peak) - static_cast<double>(expected)), 1.0);
}

TEST(Rf, EmptyPhantomGivesZeroFrame) {
    Phantom ph;
    const RfFrame rf = synthesize_rf(ph, AcousticConfig{});
    EXPECT_EQ(rf.n_lines(), 50u);
    for (double v : rf.samples.pixels()) ASSERT_EQ(v, 0.0);
    const RealImage env = envelope_detect(rf);
    for (double v : env.pixels()) ASSERT_EQ(v, 0.0);
}

TEST(Rf, DoublingAmplitudesDoublesEverySampleExactly) {
    PhantomConfig pc;
    pc.scatterer_density = 0.5;
    Phantom ph = generate_phantom(11, pc);
    const RfFrame a = synthesize_rf(ph, AcousticConfig{});
    for (auto& v : ph.amplitudes) v *= 2.0;
    const RfFrame b = synthesize_rf(ph, AcousticConfig{});
    auto x = a.samples.pixels();
    auto y = b.samples.pixels();
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(y[i], 2.0 * x[i]);
}

TEST(Rf, ArbitraryScalingIsLinearToRounding) {
    PhantomConfig pc;
    pc.scatterer_density = 0.5;
    Phantom ph = generate_phantom(12, pc);
    const RfFrame a = synthesize_rf(ph, AcousticConfig{});
    const double alpha = -0.37;
    double peak = 0.0;
    for (double v : a.samples.pixels()) peak = std::max(peak, std::abs(v));
    for (auto& v : ph.amplitudes) v *= alpha;
    const RfFrame b = synthesize_rf(ph, AcousticConfig{});
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        ASSERT_NEAR(b.samples.pixels()[i], alpha * a.samples.pixels()[i], 1e-12 * peak);
}

TEST(Rf, ThreadCountDoesNotChangeOutput) {
    PhantomConfig pc;
    pc.scatterer_density = 1.0;
    const Phantom ph = generate_phantom(13, pc);
    EXPECT_EQ(synthesize_rf(ph, AcousticConfig{}, 1).samples, synthesize_rf(ph, AcousticConfig{}, 4).samples);
}

TEST(Envelope, RecoversCosineAmplitude) {
    const AcousticConfig cfg;
    RfFrame rf;
    rf.config = cfg;
    const std::size_t n = 4096;
    rf.samples = RealImage(1, n);
    const double a = 2.5;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.sampling_frequency;
        // Tukey-style taper over the first and last 10%.
        const double edge = 0.1 * static_cast<double>(n);
        const double d = std::min(static_cast<double>(i), static_cast<double>(n - 1 - i));
        const double w = d >= edge ? 1.0 : 0.5 * (1.0 - std::cos(std::numbers::pi * d / edge));
        rf.samples(0, i) = a * w * std::cos(2.0 * std::numbers::pi * cfg.center_frequency * t);
    }
    const RealImage env = envelope_detect(rf);
    for (std::size_t i = n / 5; i < 4 * n / 5; ++i) ASSERT_NEAR(env(0, i), a, 0.02 * a);
}

TEST(Envelope, SignFlipInvariant) {
    PhantomConfig pc;
    pc.scatterer_density = 0.2;
    const RfFrame rf = synthesize_rf(generate_phantom(14, pc), AcousticConfig{});
    RfFrame neg = rf;
    for (auto& v : neg.samples.pixels()) v = -v;
    EXPECT_EQ(envelope_detect(rf), envelope_detect(neg));
}

TEST(Envelope, OddLengthAndNonNegative) {
    RfFrame rf;
    rf.samples = RealImage(2, 1001);
    Rng rng(3);
    for (auto& v : rf.samples.pixels()) v = standard_normal(rng);
    const RealImage env = envelope_detect(rf);
    for (std::size_t i = 0; i < env.size(); ++i) {
        ASSERT_GE(env.pixels()[i], 0.0);
        ASSERT_GE(env.pixels()[i] + 1e-9, std::abs(rf.samples.pixels()[i]));
    }
}

TEST(LogCompress, FormulaExamples) {
    RealImage env(1, 4);
    const double mx = 3.0;
    env(0, 0) = mx;
    env(0, 1) = mx * std::pow(10.0, -60.0 / 20.0);
    env(0, 2) = mx * std::pow(10.0, -60.0 / 40.0);
    env(0, 3) = 0.0;
    const RealImage out = log_compress(env, 60.0);
    EXPECT_EQ(out(0, 0), 1.0);
    EXPECT_NEAR(out(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(out(0, 2), 0.5, 1e-12);
    EXPECT_EQ(out(0, 3), 0.0);
}

TEST(LogCompress, ZeroFrameAndMonotone) {
    EXPECT_EQ(log_compress(RealImage(3, 3, 0.0), 60.0), RealImage(3, 3, 0.0));
    Rng rng(8);
    RealImage env(1, 500);
    for (auto& v : env.pixels()) v = unit_uniform(rng) * 10.0;
    std::sort(env.pixels().begin(), env.pixels().end());
    const RealImage out = log_compress(env, 40.0);
    for (std::size_t i = 1; i < out.size(); ++i) ASSERT_LE(out.pixels()[i - 1], out.pixels()[i]);
    for (double v : out.pixels()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    EXPECT_THROW(log_compress(env, 0.0), InvalidConfig);
}

TEST(ScanConvert, LatticeAlignedGridReproducesInput) {
    RfGeometry geo{6, 40, -2.5, 1.0, 100e6, 1540.0, 0.0};
    RealImage data(6, 40);
    Rng rng(1);
    for (auto& v : data.pixels()) v = unit_uniform(rng);
    ImageGrid g;
    g.height = 40;
    g.width = 6;
    g.lateral_spacing = 1.0;
    g.origin_lateral = -2.5;
    g.axial_spacing = geo.depth_of_sample(1.0);
    g.origin_axial = 0.0;
    const BModeImage img = scan_convert(data, geo, g);
    for (std::size_t r = 0; r < 40; ++r)
        for (std::size_t c = 0; c < 6; ++c) ASSERT_EQ(img.pixels(r, c), data(c, r));
}

TEST(ScanConvert, ConstantFrameGivesConstantImage) {
    const PhantomConfig pc;
    const AcousticConfig ac;
    RfGeometry geo{ac.n_lines, rf_sample_count(pc, ac), first_line_for(pc, ac), line_pitch_for(pc, ac), ac.sampling_frequency,
                   ac.sound_speed, 0.0};
    const BModeImage img = scan_convert(RealImage(geo.n_lines, geo.n_samples, 0.375), geo, ImageGrid{});
    for (double v : img.pixels.pixels()) ASSERT_DOUBLE_EQ(v, 0.375);
}

TEST(ScanConvert, GridBeyondImagedRegionThrows) {
    const PhantomConfig pc;
    const AcousticConfig ac;
    RfGeometry geo{ac.n_lines, rf_sample_count(pc, ac), first_line_for(pc, ac), line_pitch_for(pc, ac), ac.sampling_frequency,
                   ac.sound_speed, 0.0};
    const RealImage data(geo.n_lines, geo.n_samples, 0.5);
    ImageGrid wide = ImageGrid::covering(30.0, 60.0, -25.0, 50.0, 100, 100);
    EXPECT_THROW(scan_convert(data, geo, wide), GridOutOfBounds);
    ImageGrid deep = ImageGrid::covering(30.0, 100.0, -20.0, 40.0, 100, 100);
    EXPECT_THROW(scan_convert(data, geo, deep), GridOutOfBounds);
}

TEST(ScanConvert, BrightScattererLandsOnItsPixel) {
    const AcousticConfig ac;
    const PhantomConfig pc;
    const ImageGrid g;
    for (const Vec3 p : {Vec3{-4.9, 0.0, 47.3}, Vec3{8.16, 0.0, 71.0}, Vec3{0.3, 0.0, 35.2}}) {
        Phantom ph = single_scatterer(p);
        ph.config = pc;
        const RfFrame rf = synthesize_rf(ph, ac);
        const BModeImage img = scan_convert(log_compress(envelope_detect(rf), ac.dynamic_range_db), rf.geometry(), g);
        const auto k = argmax(img.pixels.pixels());
        const std::size_t r = k / g.width, c = k % g.width;
        // Lines are 0.82 mm apart, so laterally the peak is on the nearest line.
        const double line_x = std::round((p.x - rf.first_line_lateral) / rf.line_pitch) * rf.line_pitch + rf.first_line_lateral;
        EXPECT_NEAR(g.depth_of(r), p.z, g.axial_spacing);
        EXPECT_NEAR(g.lateral_of(c), line_x, g.lateral_spacing);
    }
}

TEST(RfDump, HeaderLayoutAndRoundTrip) {
    PhantomConfig pc;
    pc.scatterer_density = 0.05;
    AcousticConfig ac;
    ac.n_lines = 4;
    const RfFrame rf = synthesize_rf(generate_phantom(2, pc), ac);
    const auto path = std::filesystem::temp_directory_path() / "sonosim_rf_test.rf";
    write_rf_dump(path, rf);
    EXPECT_EQ(std::filesystem::file_size(path), rf_header_bytes + 4 * rf.samples.size());
    const RfDump d = read_rf_dump(path);
    EXPECT_EQ(d.n_lines, 4u);
    EXPECT_EQ(d.n_samples, rf.n_samples());
    EXPECT_EQ(d.sampling_frequency, 100e6);
    EXPECT_EQ(d.sound_speed, 1540.0);
    for (std::size_t i = 0; i < d.samples.size(); ++i) ASSERT_EQ(d.samples[i], static_cast<float>(rf.samples.pixels()[i]));
    std::filesystem::remove(path);
}

class Contrast : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(Contrast, HypoIsDarkerAndHyperIsBrighter) {
    PhantomConfig hypo;
    hypo.lesion_policy.class_mix = {0, 1, 0};
    hypo.lesion_policy.hypo_l_min = hypo.lesion_policy.hypo_l_max = 0.1;
    PhantomConfig hyper;
    hyper.lesion_policy.class_mix = {1, 0, 0};
    hyper.lesion_policy.hyper_k_min = hyper.lesion_policy.hyper_k_max = 10;

    const auto a = simulate_image(GetParam(), hypo, AcousticConfig{}, ImageGrid{});
    const auto ca = lesion_contrast(a.image, a.lesions[0], a.lesions);
    EXPECT_LT(ca.lesion_mean, ca.ring_mean);
    const auto b = simulate_image(GetParam(), hyper, AcousticConfig{}, ImageGrid{});
    const auto cb = lesion_contrast(b.image, b.lesions[0], b.lesions);
    EXPECT_GT(cb.lesion_mean, cb.ring_mean);
}

INSTANTIATE_TEST_SUITE_P(Seeds, Contrast, ::testing::Values(1u, 2u, 3u));

TEST(Simulate, DeterministicAndRegistered) {
    const auto a = simulate_image(77, PhantomConfig{}, AcousticConfig{}, ImageGrid{});
    const auto b = simulate_image(77, PhantomConfig{}, AcousticConfig{}, ImageGrid{});
    EXPECT_EQ(a.image.pixels, b.image.pixels);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.lesions, b.lesions);
    EXPECT_TRUE(a.mask.same_shape(a.image.pixels));
    for (double v : a.image.pixels.pixels()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
}

TEST(Simulate, RaisingHypoFactorBrightensLesion) {
    PhantomConfig pc;
    pc.lesion_policy.class_mix = {0, 1, 0};
    double previous = -1.0;
    for (double l : {0.05, 0.2, 0.5, 0.9}) {
        pc.lesion_policy.hypo_l_min = pc.lesion_policy.hypo_l_max = l;
        const auto s = simulate_image(21, pc, AcousticConfig{}, ImageGrid{});
        const double mean = lesion_contrast(s.image, s.lesions[0], s.lesions).lesion_mean;
        EXPECT_GT(mean, previous) << "l = " << l;
        previous = mean;
    }
}

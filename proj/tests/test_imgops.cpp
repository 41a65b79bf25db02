#include <gtest/gtest.h>

#include <cmath>

#include "sonosim/imgops.hpp"

using namespace sonosim;

namespace {

RealImage random_image(Rng& rng, std::size_t h, std::size_t w, double lo = 0.0, double hi = 255.0) {
    RealImage img(h, w);
    for (auto& v : img.pixels()) v = uniform(rng, lo, hi);
    return img;
}

MaskImage random_mask(Rng& rng, std::size_t h, std::size_t w, double p) {
    MaskImage m(h, w);
    for (auto& v : m.pixels()) v = unit_uniform(rng) < p ? 1 : 0;
    return m;
}

// Set-count oracle.
double dice_oracle(const MaskImage& g, const MaskImage& p) {
    std::vector<std::size_t> gs, ps;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.pixels()[i]) gs.push_back(i);
        if (p.pixels()[i]) ps.push_back(i);
    }
    std::size_t inter = 0;
    for (auto a : gs)
        for (auto b : ps) inter += a == b;
    if (gs.empty() && ps.empty()) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(gs.size() + ps.size());
}

}  // namespace

TEST(Resize, InVivoSizeToNetworkOutput) {
    Rng rng(1);
    const RealImage out = resize_bilinear(random_image(rng, 570, 760), 388, 388);
    EXPECT_EQ(out.height(), 388u);
    EXPECT_EQ(out.width(), 388u);
}

TEST(Resize, SameSizeIsIdentity) {
    Rng rng(2);
    const RealImage img = random_image(rng, 388, 388);
    EXPECT_EQ(resize_bilinear(img, 388, 388), img);
}

TEST(Resize, ConstantStaysConstant) {
    const RealImage out = resize_bilinear(RealImage(17, 33, 4.25), 40, 9);
    for (double v : out.pixels()) ASSERT_DOUBLE_EQ(v, 4.25);
}

TEST(Resize, CornersAligned) {
    Rng rng(3);
    const RealImage img = random_image(rng, 20, 30);
    const RealImage out = resize_bilinear(img, 7, 11);
    EXPECT_DOUBLE_EQ(out(0, 0), img(0, 0));
    EXPECT_DOUBLE_EQ(out(6, 10), img(19, 29));
    EXPECT_DOUBLE_EQ(out(0, 10), img(0, 29));
}

TEST(Resize, EmptyInputThrows) {
    EXPECT_THROW(resize_bilinear(RealImage{}, 4, 4), EmptyInput);
    EXPECT_THROW(resize_nearest(MaskImage{}, 4, 4), EmptyInput);
}

TEST(MirrorPad, OneDimensionalReflection) {
    const std::vector<double> v{1, 2, 3};
    EXPECT_EQ(mirror_pad(std::span<const double>(v), 1), (std::vector<double>{2, 1, 2, 3, 2}));
    EXPECT_EQ(mirror_pad(std::span<const double>(v), 2), (std::vector<double>{3, 2, 1, 2, 3, 2, 1}));
}

TEST(MirrorPad, NetworkSizes) {
    Rng rng(4);
    const RealImage img = random_image(rng, 388, 388);
    const RealImage padded = mirror_pad(img, 92);
    EXPECT_EQ(padded.height(), 572u);
    EXPECT_EQ(padded.width(), 572u);
    EXPECT_EQ(center_crop(padded, 388, 388), img);
    EXPECT_EQ(padded(0, 92), img(92, 0));
    EXPECT_EQ(padded(91, 91), img(1, 1));
}

TEST(MirrorPad, ShapeLawAndCropIdentityOnRandomSizes) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t h = 2 + bounded(rng, 40), w = 2 + bounded(rng, 40);
        const std::size_t pad = bounded(rng, std::min(h, w));
        const RealImage img = random_image(rng, h, w);
        const RealImage padded = mirror_pad(img, pad);
        ASSERT_EQ(padded.height(), h + 2 * pad);
        ASSERT_EQ(padded.width(), w + 2 * pad);
        ASSERT_EQ(center_crop(padded, h, w), img);
    }
}

TEST(MirrorPad, TooLargeThrows) {
    EXPECT_THROW(mirror_pad(RealImage(10, 20), 10), PadTooLarge);
    const std::vector<double> v{1, 2, 3};
    EXPECT_THROW(mirror_pad(std::span<const double>(v), 3), PadTooLarge);
}

TEST(Normalize, AffineMap) {
    RealImage img(1, 3);
    img(0, 0) = 0;
    img(0, 1) = 127.5;
    img(0, 2) = 255;
    const RealImage out = normalize01(img);
    EXPECT_EQ(out(0, 0), 0.0);
    EXPECT_EQ(out(0, 1), 0.5);
    EXPECT_EQ(out(0, 2), 1.0);
}

TEST(Normalize, ConstantImageIsZero) {
    EXPECT_EQ(normalize01(RealImage(5, 5, 42.0)), RealImage(5, 5, 0.0));
}

TEST(Normalize, MinZeroMaxOne) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const RealImage out = normalize01(random_image(rng, 9, 13, -50, 900));
        const auto [lo, hi] = std::minmax_element(out.pixels().begin(), out.pixels().end());
        ASSERT_EQ(*lo, 0.0);
        ASSERT_EQ(*hi, 1.0);
    }
}

TEST(Normalize, Divide255Mode) {
    RealImage img(1, 2);
    img(0, 0) = 51;
    img(0, 1) = 255;
    const RealImage out = normalize01(img, NormalizeMode::divide_255);
    EXPECT_DOUBLE_EQ(out(0, 0), 0.2);
    EXPECT_EQ(out(0, 1), 1.0);
}

TEST(Preprocess, AnySizeGivesNetworkTensors) {
    Rng rng(7);
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{570, 760}, {100, 93}, {388, 388}, {1000, 300}}) {
        const RealImage img = preprocess_image(random_image(rng, h, w));
        ASSERT_EQ(img.height(), 572u);
        ASSERT_EQ(img.width(), 572u);
        for (double v : img.pixels()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
        const MaskImage m = preprocess_mask(random_mask(rng, h, w, 0.3));
        ASSERT_EQ(m.height(), 388u);
        ASSERT_EQ(m.width(), 388u);
        for (auto v : m.pixels()) ASSERT_TRUE(v == 0 || v == 1);
    }
}

TEST(Augment, IdentityTransform) {
    Rng rng(8);
    const RealImage img = random_image(rng, 31, 40);
    const MaskImage mask = random_mask(rng, 31, 40, 0.5);
    const auto [i2, m2] = apply_augment(img, mask, AugmentTransform{0.0, 0.0, 1.0});
    EXPECT_EQ(i2, img);
    EXPECT_EQ(m2, mask);
}

TEST(Augment, MaskStaysBinaryAndImageInRange) {
    Rng rng(9);
    const RealImage img = random_image(rng, 50, 64, 0.0, 1.0);
    const MaskImage mask = random_mask(rng, 50, 64, 0.4);
    const double lo = *std::min_element(img.pixels().begin(), img.pixels().end());
    const double hi = *std::max_element(img.pixels().begin(), img.pixels().end());
    for (int trial = 0; trial < 50; ++trial) {
        const auto [i2, m2] = augment(img, mask, rng);
        for (auto v : m2.pixels()) ASSERT_TRUE(v == 0 || v == 1);
        for (double v : i2.pixels()) ASSERT_TRUE(v >= lo - 1e-12 && v <= hi + 1e-12);
    }
}

TEST(Augment, DrawRespectsBounds) {
    Rng rng(10);
    const AugmentConfig cfg;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto t = draw_augment(rng, cfg, 100, 200);
        ASSERT_LE(std::abs(t.shift_rows), 10.0);
        ASSERT_LE(std::abs(t.shift_cols), 20.0);
        ASSERT_GE(t.zoom, 0.9);
        ASSERT_LE(t.zoom, 1.1);
    }
}

TEST(Augment, SameSeedSameTransform) {
    Rng src(11);
    const RealImage img = random_image(src, 20, 20);
    const MaskImage mask = random_mask(src, 20, 20, 0.5);
    Rng a(99), b(99);
    EXPECT_EQ(augment(img, mask, a), augment(img, mask, b));
}

TEST(Augment, IntegerShiftMovesMask) {
    MaskImage mask(10, 10, 0);
    mask(4, 4) = 1;
    const auto [i2, m2] = apply_augment(RealImage(10, 10, 0.5), mask, AugmentTransform{2.0, -1.0, 1.0});
    EXPECT_EQ(m2(6, 3), 1);
    std::size_t total = 0;
    for (auto v : m2.pixels()) total += v;
    EXPECT_EQ(total, 1u);
}

TEST(Augment, ShapeMismatchThrows) {
    Rng rng(1);
    EXPECT_THROW(augment(RealImage(4, 4), MaskImage(4, 5), rng), ShapeMismatch);
}

TEST(Argmax, TieGoesToBackground) {
    ProbMap p(1, 3);
    p(0, 0) = {0.3, 0.7};
    p(0, 1) = {0.5, 0.5};
    p(0, 2) = {0.6, 0.4};
    const MaskImage m = binarize_argmax(p);
    EXPECT_EQ(m(0, 0), 1);
    EXPECT_EQ(m(0, 1), 0);
    EXPECT_EQ(m(0, 2), 0);
}

TEST(Argmax, UniformBackgroundIsEmpty) {
    ProbMap p(8, 8, {0.6, 0.4});
    EXPECT_EQ(binarize_argmax(p), MaskImage(8, 8, 0));
}

TEST(Dice, Examples) {
    MaskImage g(4, 4, 0), p(4, 4, 0);
    g(0, 0) = g(0, 1) = g(0, 2) = g(0, 3) = 1;
    EXPECT_EQ(dice(g, g), 1.0);
    p(3, 0) = p(3, 1) = 1;
    EXPECT_EQ(dice(g, p), 0.0);
    MaskImage q(4, 4, 0);
    q(0, 2) = q(0, 3) = q(1, 0) = q(1, 1) = 1;
    EXPECT_EQ(dice_oracle(g, q), 0.5);
    EXPECT_EQ(dice(g, q), 0.5);
    EXPECT_EQ(dice(MaskImage(3, 3, 0), MaskImage(3, 3, 0)), 1.0);
    EXPECT_EQ(dice(g, MaskImage(4, 4, 0)), 0.0);
}

TEST(Dice, ShapeMismatchThrows) {
    EXPECT_THROW(dice(MaskImage(3, 3), MaskImage(3, 4)), ShapeMismatch);
}

TEST(Dice, MatchesSetCountOracleSymmetricAndBounded) {
    Rng rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
        const double p = unit_uniform(rng);
        const MaskImage g = random_mask(rng, 16, 16, p);
        const MaskImage q = random_mask(rng, 16, 16, unit_uniform(rng));
        const double d = dice(g, q);
        ASSERT_EQ(d, dice_oracle(g, q));
        ASSERT_EQ(d, dice(q, g));
        ASSERT_TRUE(d >= 0.0 && d <= 1.0);
    }
}

TEST(SoftDice, Examples) {
    MaskImage g(1, 2, 0);
    g(0, 0) = 1;
    RealImage p(1, 2, 0.0);
    p(0, 0) = 1.0;
    EXPECT_EQ(soft_dice_loss(p, g), 0.0);
    RealImage q(1, 2, 0.0);
    q(0, 1) = 1.0;
    EXPECT_NEAR(soft_dice_loss(q, g), 1.0 - 1.0 / 3.0, 1e-15);
    EXPECT_EQ(soft_dice_loss(RealImage(3, 3, 0.0), MaskImage(3, 3, 0)), 0.0);
    EXPECT_THROW(soft_dice_loss(RealImage(2, 2), MaskImage(2, 3)), ShapeMismatch);
}

TEST(SoftDice, RangeProperty) {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        RealImage p(6, 6);
        for (auto& v : p.pixels()) v = unit_uniform(rng);
        const double l = soft_dice_loss(p, random_mask(rng, 6, 6, 0.5));
        ASSERT_TRUE(l >= 0.0 && l < 1.0);
    }
}

TEST(SoftDice, GradientMatchesCentralDifferences) {
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        RealImage p(8, 8);
        for (auto& v : p.pixels()) v = uniform(rng, 0.05, 0.95);
        const MaskImage g = random_mask(rng, 8, 8, 0.4);
        const RealImage grad = soft_dice_loss_gradient(p, g);
        const double h = 1e-6;
        for (std::size_t i = 0; i < p.size(); ++i) {
            RealImage up = p, dn = p;
            up.pixels()[i] += h;
            dn.pixels()[i] -= h;
            const double fd = (soft_dice_loss(up, g) - soft_dice_loss(dn, g)) / (2.0 * h);
            ASSERT_NEAR(grad.pixels()[i], fd, 1e-5 * std::max(std::abs(fd), 1e-3));
        }
    }
}

TEST(Report, MeanStdFormatting) {
    const std::vector<double> v{1.0, 0.0, 0.5};
    const MeanStd ms = mean_std(v);
    EXPECT_DOUBLE_EQ(ms.mean, 0.5);
    EXPECT_DOUBLE_EQ(ms.std, std::sqrt(1.0 / 6.0));
    EXPECT_EQ(format_mean_std(ms), "0.50 ± 0.41");
}

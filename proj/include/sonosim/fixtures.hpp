#pragma once

// Golden files for conformance testing of downstream consumers (training
// harness): preprocessing input/output pairs, Dice and soft-Dice cases, argmax
// tie handling, and a tiny simulated dataset. Everything is a pure function of
// the fixed seeds below, so reruns are byte-identical.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sonosim/datagen.hpp"
#include "sonosim/imgops.hpp"
#include "sonosim/manifest.hpp"
#include "sonosim/npy_io.hpp"
#include "sonosim/png_io.hpp"
#include "sonosim/random.hpp"

namespace sonosim {

namespace detail {

template <typename T>
void write_image_npy(const fs::path& path, const Image<T>& img) {
    npy::write<T>(path, img.pixels(), {img.height(), img.width()});
}

inline Image<std::uint8_t> random_bytes(Rng& rng, std::size_t h, std::size_t w) {
    Image<std::uint8_t> img(h, w);
    for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(bounded(rng, 256));
    return img;
}

inline MaskImage random_mask(Rng& rng, std::size_t h, std::size_t w, double p) {
    MaskImage m(h, w, 0);
    for (auto& v : m.pixels()) v = unit_uniform(rng) < p ? 1 : 0;
    return m;
}

}  // namespace detail

inline constexpr std::uint64_t fixture_seed = 20210101;
inline constexpr std::size_t fixture_random_dice_pairs = 64;
inline constexpr std::size_t fixture_soft_dice_cases = 8;
inline constexpr std::size_t fixture_sim_images = 8;

/// The three handmade Dice pairs (overlap all / none / half) on 16x16 masks.
struct DiceFixture {
    std::string name;
    MaskImage truth;
    MaskImage pred;
};

inline std::vector<DiceFixture> handmade_dice_pairs() {
    auto square = [](std::size_t r0, std::size_t c0, std::size_t n) {
        MaskImage m(16, 16, 0);
        for (std::size_t r = r0; r < r0 + n; ++r)
            for (std::size_t c = c0; c < c0 + n; ++c) m(r, c) = 1;
        return m;
    };
    MaskImage half_truth(16, 16, 0), half_pred(16, 16, 0);
    // |G| = |P| = 4, overlap 2.
    half_truth(4, 4) = half_truth(4, 5) = half_truth(4, 6) = half_truth(4, 7) = 1;
    half_pred(4, 6) = half_pred(4, 7) = half_pred(4, 8) = half_pred(4, 9) = 1;
    return {{"all", square(3, 3, 6), square(3, 3, 6)},
            {"half", half_truth, half_pred},
            {"none", square(0, 0, 4), square(10, 10, 4)}};
}

inline nlohmann::json write_fixtures(const fs::path& out, unsigned threads = 1) {
    ensure_directory(out / "preprocess");
    ensure_directory(out / "dice" / "truth");
    ensure_directory(out / "dice" / "pred");
    ensure_directory(out / "loss");
    ensure_directory(out / "argmax");

    nlohmann::json index;
    index["schema"] = "sonosim.fixtures/1";
    index["seed"] = fixture_seed;
    Rng rng(fixture_seed);

    // 1D reflection.
    const std::vector<double> v1{1.0, 2.0, 3.0};
    const auto v1_out = mirror_pad(std::span<const double>(v1), 1);
    npy::write<double>(out / "preprocess/reflect_1d_in.npy", v1, {v1.size()});
    npy::write<double>(out / "preprocess/reflect_1d_out.npy", v1_out, {v1_out.size()});

    // 388 -> 572 mirror pad.
    const RealImage pad_in = png::to_real(detail::random_bytes(rng, net_output_size, net_output_size));
    detail::write_image_npy(out / "preprocess/mirror_in_388.npy", pad_in);
    detail::write_image_npy(out / "preprocess/mirror_out_572.npy", mirror_pad(pad_in, net_mirror_pad));

    // Full image chain from a 570x760 8-bit image, and the matching mask path.
    const RealImage chain_in = png::to_real(detail::random_bytes(rng, 570, 760));
    detail::write_image_npy(out / "preprocess/chain_in_570x760.npy", chain_in);
    detail::write_image_npy(out / "preprocess/chain_out_572.npy", preprocess_image(chain_in));
    detail::write_image_npy(out / "preprocess/resize_out_388.npy", resize_bilinear(chain_in, net_output_size, net_output_size));
    const MaskImage mask_in = detail::random_mask(rng, 570, 760, 0.3);
    detail::write_image_npy(out / "preprocess/mask_in_570x760.npy", mask_in);
    detail::write_image_npy(out / "preprocess/mask_out_388.npy", preprocess_mask(mask_in));
    index["preprocess"] = {{"output_size", net_output_size},
                           {"mirror_pad", net_mirror_pad},
                           {"input_size", net_input_size},
                           {"resize", "bilinear, corner-aligned"},
                           {"mask_resize", "nearest, corner-aligned"},
                           {"normalize", "min_max"},
                           {"reflection", "border sample not repeated"}};

    // Dice: handmade pairs as PNG plus a batch of random pairs.
    std::vector<double> handmade_scores;
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& f : handmade_dice_pairs()) {
        png::write_mask(out / "dice/truth" / (f.name + ".png"), f.truth);
        png::write_mask(out / "dice/pred" / (f.name + ".png"), f.pred);
        const double d = dice(f.truth, f.pred);
        handmade_scores.push_back(d);
        cases.push_back({{"name", f.name},
                         {"truth", "dice/truth/" + f.name + ".png"},
                         {"pred", "dice/pred/" + f.name + ".png"},
                         {"dice", d}});
    }
    const MeanStd summary = mean_std(handmade_scores);
    index["dice"] = {{"cases", cases},
                     {"mean", summary.mean},
                     {"std", summary.std},
                     {"formatted", format_mean_std(summary)},
                     {"empty_empty", 1.0}};

    std::vector<std::uint8_t> pairs;
    std::vector<double> expected;
    for (std::size_t i = 0; i < fixture_random_dice_pairs; ++i) {
        const double p = unit_uniform(rng);
        const MaskImage g = detail::random_mask(rng, 16, 16, p);
        const MaskImage q = detail::random_mask(rng, 16, 16, p);
        pairs.insert(pairs.end(), g.pixels().begin(), g.pixels().end());
        pairs.insert(pairs.end(), q.pixels().begin(), q.pixels().end());
        expected.push_back(dice(g, q));
    }
    npy::write<std::uint8_t>(out / "dice/random_pairs.npy", pairs, {fixture_random_dice_pairs, 2, 16, 16});
    npy::write<double>(out / "dice/random_expected.npy", expected, {fixture_random_dice_pairs});

    // Soft Dice loss and its gradient on 8x8 instances.
    std::vector<double> probs, losses, grads;
    std::vector<std::uint8_t> truths;
    for (std::size_t i = 0; i < fixture_soft_dice_cases; ++i) {
        RealImage p(8, 8);
        for (auto& v : p.pixels()) v = unit_uniform(rng);
        const MaskImage g = detail::random_mask(rng, 8, 8, 0.4);
        probs.insert(probs.end(), p.pixels().begin(), p.pixels().end());
        truths.insert(truths.end(), g.pixels().begin(), g.pixels().end());
        losses.push_back(soft_dice_loss(p, g));
        const RealImage gr = soft_dice_loss_gradient(p, g);
        grads.insert(grads.end(), gr.pixels().begin(), gr.pixels().end());
    }
    const std::size_t k = fixture_soft_dice_cases;
    npy::write<double>(out / "loss/prob_fg.npy", probs, {k, 8, 8});
    npy::write<std::uint8_t>(out / "loss/truth.npy", truths, {k, 8, 8});
    npy::write<double>(out / "loss/soft_dice.npy", losses, {k});
    npy::write<double>(out / "loss/soft_dice_grad.npy", grads, {k, 8, 8});
    index["loss"] = {{"epsilon", soft_dice_epsilon}};

    // Argmax with ties on a 4x4x2 map.
    ProbMap pm(4, 4);
    for (std::size_t i = 0; i < pm.size(); ++i) {
        const double a = static_cast<double>(i % 3) * 0.25;
        const double b = static_cast<double>((i / 3) % 3) * 0.25;
        pm.pixels()[i] = {a, b};
    }
    std::vector<double> flat;
    for (const auto& px : pm.pixels()) flat.insert(flat.end(), px.begin(), px.end());
    npy::write<double>(out / "argmax/prob.npy", flat, {4, 4, 2});
    detail::write_image_npy(out / "argmax/mask.npy", binarize_argmax(pm));
    index["argmax"] = {{"tie", "background"}};

    // Tiny simulated dataset.
    generate_sim_dataset(SimulationConfig{}, fixture_sim_images, fixture_seed, out / "sim8", threads);
    index["sim8"] = {{"manifest", "sim8/manifest.json"}, {"count", fixture_sim_images}};

    std::ofstream f(out / "fixtures.json", std::ios::binary);
    if (!f) throw IoError("cannot write " + (out / "fixtures.json").string());
    f << index.dump(2) << "\n";
    return index;
}

}  // namespace sonosim

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sonosim/beamsim.hpp"
#include "sonosim/error.hpp"
#include "sonosim/manifest.hpp"
#include "sonosim/png_io.hpp"
#include "sonosim/random.hpp"

namespace sonosim {

namespace fs = std::filesystem;

/// Train/val/test sizing, either as fractions (test takes the remainder) or as
/// absolute counts (test defaults to the remainder).
struct SplitPolicy {
    bool use_counts = false;
    double train_fraction = 0.60;
    double val_fraction = 0.15;
    std::size_t train_count = 0;
    std::size_t val_count = 0;
    std::optional<std::size_t> test_count;
    std::uint64_t seed = 0;

    static SplitPolicy fractions(double train, double val, std::uint64_t seed) {
        SplitPolicy p;
        p.train_fraction = train;
        p.val_fraction = val;
        p.seed = seed;
        return p;
    }
    static SplitPolicy counts(std::size_t train, std::size_t val, std::optional<std::size_t> test,
                              std::uint64_t seed) {
        SplitPolicy p;
        p.use_counts = true;
        p.train_count = train;
        p.val_count = val;
        p.test_count = test;
        p.seed = seed;
        return p;
    }

    SplitCounts resolve(std::size_t n) const {
        if (use_counts) {
            if (train_count + val_count > n)
                throw InvalidConfig("split policy asks for " + std::to_string(train_count + val_count) +
                                    " train+val items but the corpus has " + std::to_string(n));
            const std::size_t test = n - train_count - val_count;
            if (test_count && *test_count != test)
                throw InvalidConfig("split counts " + std::to_string(train_count) + "/" + std::to_string(val_count) +
                                    "/" + std::to_string(*test_count) + " do not sum to corpus size " +
                                    std::to_string(n));
            return {train_count, val_count, test};
        }
        if (!(train_fraction >= 0.0 && val_fraction >= 0.0 && train_fraction + val_fraction <= 1.0))
            throw InvalidConfig("split fractions must be non-negative with train + val <= 1");
        const auto train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
        const auto val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
        if (train + val > n) throw InvalidConfig("rounded split fractions exceed the corpus size");
        return {train, val, n - train - val};
    }
};

/// Shuffles the items with `seed` and labels the first counts.train as train,
/// the next counts.val as val, the rest as test. Result is indexed like `n`.
inline std::vector<Split> assign_splits(std::size_t n, const SplitCounts& counts, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    shuffle(std::span<std::size_t>(order), rng);
    std::vector<Split> out(n, Split::test);
    for (std::size_t r = 0; r < n; ++r) {
        if (r < counts.train)
            out[order[r]] = Split::train;
        else if (r < counts.train + counts.val)
            out[order[r]] = Split::val;
    }
    return out;
}

inline std::string sim_image_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sim_%05zu", index);
    return buf;
}

inline void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

/// Simulates `count` images with per-image seeds derive_seed(master_seed, i),
/// writes `images/<id>.png` and `images/<id>_mask.png` plus `manifest.json`
/// under out_dir, and splits 60/15/25.
inline DatasetManifest generate_sim_dataset(const SimulationConfig& cfg, std::size_t count, std::uint64_t master_seed,
                                            const fs::path& out_dir, unsigned threads = 1,
                                            const SplitPolicy& policy = SplitPolicy::fractions(0.60, 0.15, 0)) {
    cfg.validate();
    if (count == 0) throw InvalidConfig("simulated dataset needs count >= 1");
    const SplitCounts counts = policy.resolve(count);
    ensure_directory(out_dir / "images");

    DatasetManifest m;
    m.kind = DatasetKind::simulated;
    m.master_seed = master_seed;
    m.generation_config = cfg;
    m.entries.resize(count);

    parallel_for(count, threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(master_seed, i);
        const SimulatedImage sim = simulate_image(seed, cfg.phantom, cfg.acoustic, cfg.grid);
        ManifestEntry& e = m.entries[i];
        e.id = sim_image_id(i);
        e.image_path = "images/" + e.id + ".png";
        e.mask_path = "images/" + e.id + "_mask.png";
        e.seed = seed;
        e.lesions = sim.lesions;
        png::write_image(out_dir / e.image_path, sim.image.pixels);
        png::write_mask(out_dir / e.mask_path, sim.mask);
    });

    const auto splits = assign_splits(count, counts, policy.use_counts ? policy.seed : master_seed);
    for (std::size_t i = 0; i < count; ++i) m.entries[i].split = splits[i];
    write_manifest(out_dir / "manifest.json", m);
    return m;
}

enum class RejectReason { missing_mask, missing_image, non_binary_mask, shape_mismatch, unreadable };

inline const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::missing_mask: return "MissingMask";
        case RejectReason::missing_image: return "MissingImage";
        case RejectReason::non_binary_mask: return "NonBinaryMask";
        case RejectReason::shape_mismatch: return "ShapeMismatch";
        case RejectReason::unreadable: return "Unreadable";
    }
    return "?";
}

struct Rejection {
    std::string id;
    RejectReason reason;
    std::string detail;
};

/// Raised once per ingestion with every offending pair.
class IngestError : public Error {
public:
    explicit IngestError(std::vector<Rejection> rejected)
        : Error(summarize(rejected)), rejected_(std::move(rejected)) {}
    const std::vector<Rejection>& rejected() const noexcept { return rejected_; }

private:
    static std::string summarize(const std::vector<Rejection>& r) {
        std::string s = std::to_string(r.size()) + " pair(s) rejected:";
        for (const auto& x : r) s += "\n  " + x.id + ": " + to_string(x.reason) + " (" + x.detail + ")";
        return s;
    }
    std::vector<Rejection> rejected_;
};

struct IngestOptions {
    std::string mask_suffix = "_mask";
    std::string extension = ".png";
    unsigned threads = 1;
};

namespace detail {

inline std::string relative_path(const fs::path& target, const fs::path& base) {
    return fs::relative(fs::absolute(target), fs::absolute(base)).generic_string();
}

// Accepts gray or RGB masks whose channels agree and whose values are all in
// {0, 255} or all in {0, 1}.
inline std::optional<std::string> check_binary(const png::Pixels& px, bool& needs_rewrite) {
    bool has_one = false, has_255 = false;
    const std::size_t n = px.height * px.width;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t v = px.data[i * px.channels];
        for (std::size_t c = 1; c < px.channels; ++c) {
            if (px.data[i * px.channels + c] != v)
                return "channels disagree at pixel " + std::to_string(i);
        }
        if (v == 1) has_one = true;
        else if (v == 255) has_255 = true;
        else if (v != 0) return "value " + std::to_string(v) + " at pixel " + std::to_string(i);
    }
    if (has_one && has_255) return "mixes values 1 and 255";
    needs_rewrite = px.channels != 1 || has_one;
    return std::nullopt;
}

}  // namespace detail

/// Discovers `<id>.png` / `<id>_mask.png` pairs in corpus_dir, validates them,
/// and splits per policy. Color images are converted to luma grayscale and
/// written under manifest_dir/gray; masks not already stored as gray {0, 255}
/// are rewritten under manifest_dir/masks. Entry paths are relative to
/// manifest_dir.
inline DatasetManifest ingest_labeled_corpus(const fs::path& corpus_dir, DatasetKind kind, const SplitPolicy& policy,
                                             const fs::path& manifest_dir, const IngestOptions& opt = {}) {
    if (!fs::is_directory(corpus_dir)) throw IoError("corpus directory " + corpus_dir.string() + " does not exist");

    const std::string mask_tail = opt.mask_suffix + opt.extension;
    std::set<std::string> image_ids, mask_ids;
    for (const auto& de : fs::directory_iterator(corpus_dir)) {
        if (!de.is_regular_file()) continue;
        const std::string name = de.path().filename().string();
        if (name.size() > mask_tail.size() && name.ends_with(mask_tail))
            mask_ids.insert(name.substr(0, name.size() - mask_tail.size()));
        else if (name.size() > opt.extension.size() && name.ends_with(opt.extension))
            image_ids.insert(name.substr(0, name.size() - opt.extension.size()));
    }

    std::vector<Rejection> rejected;
    for (const auto& id : mask_ids)
        if (!image_ids.contains(id)) rejected.push_back({id, RejectReason::missing_image, id + mask_tail + " has no image"});

    const std::vector<std::string> ids(image_ids.begin(), image_ids.end());
    std::vector<ManifestEntry> entries(ids.size());
    std::vector<std::optional<Rejection>> problems(ids.size());

    ensure_directory(manifest_dir);
    parallel_for(ids.size(), opt.threads, [&](std::size_t i) {
        const std::string& id = ids[i];
        const fs::path image_path = corpus_dir / (id + opt.extension);
        const fs::path mask_path = corpus_dir / (id + mask_tail);
        if (!mask_ids.contains(id)) {
            problems[i] = Rejection{id, RejectReason::missing_mask, "expected " + mask_path.filename().string()};
            return;
        }
        png::Pixels img, mask;
        try {
            img = png::read(image_path);
            mask = png::read(mask_path);
        } catch (const IoError& e) {
            problems[i] = Rejection{id, RejectReason::unreadable, e.what()};
            return;
        }
        if (img.height != mask.height || img.width != mask.width) {
            problems[i] = Rejection{id, RejectReason::shape_mismatch,
                                    "image " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                                        " vs mask " + std::to_string(mask.height) + "x" + std::to_string(mask.width)};
            return;
        }
        bool rewrite_mask = false;
        if (auto bad = detail::check_binary(mask, rewrite_mask)) {
            problems[i] = Rejection{id, RejectReason::non_binary_mask, *bad};
            return;
        }

        ManifestEntry& e = entries[i];
        e.id = id;
        fs::path stored_image = image_path;
        if (img.channels != 1) {
            stored_image = manifest_dir / "gray" / (id + ".png");
            ensure_directory(stored_image.parent_path());
            const auto gray = png::to_gray(img);
            png::write_gray(stored_image, gray.height(), gray.width(), gray.pixels());
        }
        fs::path stored_mask = mask_path;
        if (rewrite_mask) {
            stored_mask = manifest_dir / "masks" / (id + "_mask.png");
            ensure_directory(stored_mask.parent_path());
            auto m = png::to_gray(mask);
            for (auto& v : m.pixels()) v = v != 0 ? 1 : 0;
            png::write_mask(stored_mask, m);
        }
        e.image_path = detail::relative_path(stored_image, manifest_dir);
        e.mask_path = detail::relative_path(stored_mask, manifest_dir);
    });

    for (auto& p : problems)
        if (p) rejected.push_back(std::move(*p));
    if (!rejected.empty()) {
        std::sort(rejected.begin(), rejected.end(), [](const Rejection& a, const Rejection& b) { return a.id < b.id; });
        throw IngestError(std::move(rejected));
    }

    DatasetManifest m;
    m.kind = kind;
    m.master_seed = policy.seed;
    const auto splits = assign_splits(entries.size(), policy.resolve(entries.size()), policy.seed);
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].split = splits[i];
    m.entries = std::move(entries);
    return m;
}

/// Shuffles the train+val pool with `seed` and deals it round-robin into k folds.
inline FoldPlan make_folds(const DatasetManifest& manifest, std::size_t k, std::uint64_t seed) {
    std::vector<std::string> pool;
    for (const auto& e : manifest.entries)
        if (e.split != Split::test) pool.push_back(e.id);
    if (k == 0) throw InvalidConfig("make_folds: k must be >= 1");
    if (k > pool.size())
        throw KTooLarge("make_folds: k = " + std::to_string(k) + " exceeds the train+val pool of " +
                        std::to_string(pool.size()));
    Rng rng(seed);
    shuffle(std::span<std::string>(pool), rng);
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.folds.resize(k);
    for (std::size_t i = 0; i < pool.size(); ++i) plan.folds[i % k].push_back(pool[i]);
    return plan;
}

/// Keeps n training entries drawn without replacement; val and test are
/// untouched. Any fold plan is dropped since its pool no longer exists.
inline DatasetManifest subsample(const DatasetManifest& manifest, std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i)
        if (manifest.entries[i].split == Split::train) train.push_back(i);
    if (n > train.size())
        throw NTooLarge("subsample: n = " + std::to_string(n) + " exceeds the training split of " +
                        std::to_string(train.size()));
    Rng rng(seed);
    shuffle(std::span<std::size_t>(train), rng);
    std::vector<bool> keep(manifest.entries.size(), true);
    for (std::size_t r = n; r < train.size(); ++r) keep[train[r]] = false;

    DatasetManifest out = manifest;
    out.entries.clear();
    out.folds.reset();
    for (std::size_t i = 0; i < manifest.entries.size(); ++i)
        if (keep[i]) out.entries.push_back(manifest.entries[i]);
    return out;
}

/// Writes n labeled pairs of small synthetic "lesion" images (a dark disc on a
/// noisy background) as `<prefix>NNN.png` / `<prefix>NNN_mask.png`. Stand-in
/// for corpora that cannot be redistributed.
inline void write_standin_corpus(const fs::path& dir, std::size_t n, std::uint64_t seed, bool rgb = false,
                                 std::size_t height = 24, std::size_t width = 32,
                                 const std::string& prefix = "case_") {
    ensure_directory(dir);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, i));
        const double cy = uniform(rng, 0.3, 0.7) * static_cast<double>(height);
        const double cx = uniform(rng, 0.3, 0.7) * static_cast<double>(width);
        const double rad = uniform(rng, 0.12, 0.25) * static_cast<double>(std::min(height, width));
        Image<std::uint8_t> img(height, width);
        MaskImage mask(height, width, 0);
        for (std::size_t r = 0; r < height; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
                const double dy = static_cast<double>(r) - cy, dx = static_cast<double>(c) - cx;
                const bool inside = dy * dy + dx * dx <= rad * rad;
                mask(r, c) = inside ? 1 : 0;
                img(r, c) = static_cast<std::uint8_t>((inside ? 40 : 150) + bounded(rng, 60));
            }
        }
        char name[64];
        std::snprintf(name, sizeof name, "%s%03zu", prefix.c_str(), i);
        if (rgb) {
            std::vector<std::uint8_t> px(3 * height * width);
            for (std::size_t k = 0; k < img.size(); ++k) {
                const auto v = img.pixels()[k];
                px[3 * k] = v;
                px[3 * k + 1] = static_cast<std::uint8_t>(255 - v);
                px[3 * k + 2] = static_cast<std::uint8_t>(v / 2);
            }
            png::write_rgb(dir / (std::string(name) + ".png"), height, width, px);
        } else {
            png::write_gray(dir / (std::string(name) + ".png"), height, width, img.pixels());
        }
        png::write_mask(dir / (std::string(name) + "_mask.png"), mask);
    }
}

/// Ids of entries whose image or mask is missing on disk.
inline std::vector<std::string> missing_files(const DatasetManifest& m, const fs::path& manifest_dir) {
    std::vector<std::string> missing;
    for (const auto& e : m.entries)
        if (!fs::is_regular_file(manifest_dir / e.image_path) || !fs::is_regular_file(manifest_dir / e.mask_path))
            missing.push_back(e.id);
    return missing;
}

}  // namespace sonosim

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sonosim/beamsim.hpp"
#include "sonosim/error.hpp"
#include "sonosim/image.hpp"
#include "sonosim/phantom.hpp"

namespace sonosim {

enum class DatasetKind { simulated, invivo, natural };
enum class Split { train, val, test };

NLOHMANN_JSON_SERIALIZE_ENUM(DatasetKind, {{DatasetKind::simulated, "simulated"},
                                           {DatasetKind::invivo, "invivo"},
                                           {DatasetKind::natural, "natural"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Split, {{Split::train, "train"}, {Split::val, "val"}, {Split::test, "test"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Echogenicity, {{Echogenicity::hyperechoic, "hyperechoic"},
                                            {Echogenicity::hypoechoic, "hypoechoic"}})
NLOHMANN_JSON_SERIALIZE_ENUM(LesionShape, {{LesionShape::circle, "circle"}, {LesionShape::ellipsoid, "ellipsoid"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ScalingMode, {{ScalingMode::amplitude, "amplitude"}, {ScalingMode::power, "power"}})

inline void to_json(nlohmann::json& j, const Vec3& v) { j = nlohmann::json::array({v.x, v.y, v.z}); }
inline void from_json(const nlohmann::json& j, Vec3& v) {
    v = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline void to_json(nlohmann::json& j, const LesionSpec& l) {
    j = {{"class", l.echogenicity}, {"shape", l.shape}, {"center", l.center}, {"radii", l.radii}, {"scale", l.scale}};
}
inline void from_json(const nlohmann::json& j, LesionSpec& l) {
    j.at("class").get_to(l.echogenicity);
    j.at("shape").get_to(l.shape);
    j.at("center").get_to(l.center);
    j.at("radii").get_to(l.radii);
    j.at("scale").get_to(l.scale);
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LesionPolicy, class_mix, count_min, count_max, shape_mix, radius_min, radius_max,
                                   hyper_k_min, hyper_k_max, hypo_l_min, hypo_l_max, margin, scaling)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PhantomConfig, axial_extent, lateral_extent, elevational_extent, standoff,
                                   scatterer_density, lesion_policy)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AcousticConfig, n_lines, center_frequency, sampling_frequency, sound_speed,
                                   fractional_bandwidth, f_number, elevation_f_number, dynamic_range_db)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ImageGrid, height, width, axial_spacing, lateral_spacing, origin_axial,
                                   origin_lateral)

/// Everything that determines a simulated image besides its seed.
struct SimulationConfig {
    PhantomConfig phantom;
    AcousticConfig acoustic;
    ImageGrid grid;

    void validate() const {
        phantom.validate();
        acoustic.validate();
        grid.validate();
    }
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimulationConfig, phantom, acoustic, grid)

struct SplitCounts {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;

    std::size_t total() const { return train + val + test; }
    friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SplitCounts, train, val, test)

struct ManifestEntry {
    std::string id;
    std::string image_path;  // relative to the manifest's directory
    std::string mask_path;
    Split split = Split::train;
    std::optional<std::uint64_t> seed;  // simulated only
    std::vector<LesionSpec> lesions;     // simulated only
};

/// k folds over the train+val pool; run i validates on folds[i] and trains on
/// the rest.
struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::string>> folds;

    std::vector<std::string> validation_ids(std::size_t run) const { return folds.at(run); }
    std::vector<std::string> training_ids(std::size_t run) const {
        std::vector<std::string> ids;
        for (std::size_t f = 0; f < folds.size(); ++f)
            if (f != run) ids.insert(ids.end(), folds[f].begin(), folds[f].end());
        return ids;
    }
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FoldPlan, k, seed, folds)

struct DatasetManifest {
    DatasetKind kind = DatasetKind::simulated;
    std::uint64_t master_seed = 0;
    std::optional<SimulationConfig> generation_config;
    std::vector<ManifestEntry> entries;
    std::optional<FoldPlan> folds;

    SplitCounts counts() const {
        SplitCounts c;
        for (const auto& e : entries) {
            switch (e.split) {
                case Split::train: ++c.train; break;
                case Split::val: ++c.val; break;
                case Split::test: ++c.test; break;
            }
        }
        return c;
    }

    std::vector<const ManifestEntry*> split(Split s) const {
        std::vector<const ManifestEntry*> out;
        for (const auto& e : entries)
            if (e.split == s) out.push_back(&e);
        return out;
    }
};

inline void to_json(nlohmann::json& j, const ManifestEntry& e) {
    j = {{"id", e.id}, {"image_path", e.image_path}, {"mask_path", e.mask_path}, {"split", e.split}};
    if (e.seed) j["seed"] = *e.seed;
    if (e.seed || !e.lesions.empty()) j["lesions"] = e.lesions;
}
inline void from_json(const nlohmann::json& j, ManifestEntry& e) {
    j.at("id").get_to(e.id);
    j.at("image_path").get_to(e.image_path);
    j.at("mask_path").get_to(e.mask_path);
    j.at("split").get_to(e.split);
    if (j.contains("seed")) e.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("lesions")) j.at("lesions").get_to(e.lesions);
}

inline void to_json(nlohmann::json& j, const DatasetManifest& m) {
    j = {{"schema", "sonosim.manifest/1"},
         {"dataset_kind", m.kind},
         {"master_seed", m.master_seed},
         {"counts", m.counts()},
         {"entries", m.entries}};
    if (m.generation_config) j["generation_config"] = *m.generation_config;
    if (m.folds) j["folds"] = *m.folds;
}
inline void from_json(const nlohmann::json& j, DatasetManifest& m) {
    j.at("dataset_kind").get_to(m.kind);
    j.at("master_seed").get_to(m.master_seed);
    j.at("entries").get_to(m.entries);
    m.generation_config.reset();
    m.folds.reset();
    if (j.contains("generation_config")) m.generation_config = j.at("generation_config").get<SimulationConfig>();
    if (j.contains("folds")) m.folds = j.at("folds").get<FoldPlan>();
}

/// Canonical text: sorted keys, two-space indent, shortest round-trip floats.
inline std::string manifest_text(const DatasetManifest& m) {
    const nlohmann::json j = m;
    return j.dump(2) + "\n";
}

inline void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << manifest_text(m);
    if (!out) throw IoError("failed writing " + path.string());
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in).get<DatasetManifest>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": malformed manifest: " + e.what());
    }
}

}  // namespace sonosim

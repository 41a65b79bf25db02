#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sonosim/error.hpp"
#include "sonosim/image.hpp"
#include "sonosim/random.hpp"

namespace sonosim {

/// Phantom coordinates in mm: x lateral (centered on the array), y elevational
/// (centered on the imaging plane), z depth measured from the transducer face.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;
};

enum class Echogenicity { hyperechoic, hypoechoic };
enum class LesionShape { circle, ellipsoid };
enum class LesionClassDraw { hyper_only, hypo_only, both };

/// How a lesion's scale factor acts on scatterer reflectivity: `amplitude`
/// multiplies amplitudes by the factor, `power` multiplies echo power by it
/// (amplitudes by its square root).
enum class ScalingMode { amplitude, power };

inline const char* to_string(Echogenicity e) { return e == Echogenicity::hyperechoic ? "hyperechoic" : "hypoechoic"; }
inline const char* to_string(LesionShape s) { return s == LesionShape::circle ? "circle" : "ellipsoid"; }

struct LesionPolicy {
    // Weights over {hyper-only, hypo-only, both}.
    std::array<double, 3> class_mix{1.0, 1.0, 1.0};
    int count_min = 1;
    int count_max = 1;
    // Weights over {circle, ellipsoid}.
    std::array<double, 2> shape_mix{1.0, 1.0};
    double radius_min = 3.0;
    double radius_max = 12.0;
    int hyper_k_min = 1;
    int hyper_k_max = 10;
    // Open interval (hypo_l_min, hypo_l_max); a degenerate interval pins l.
    double hypo_l_min = 0.0;
    double hypo_l_max = 1.0;
    double margin = 2.0;
    ScalingMode scaling = ScalingMode::amplitude;

    void validate() const {
        auto nonneg_positive_sum = [](std::span<const double> w) {
            double s = 0.0;
            for (double v : w) {
                if (!(v >= 0.0) || !std::isfinite(v)) return false;
                s += v;
            }
            return s > 0.0;
        };
        if (!nonneg_positive_sum(class_mix)) throw InvalidConfig("LesionPolicy: class_mix needs non-negative weights with positive sum");
        if (!nonneg_positive_sum(shape_mix)) throw InvalidConfig("LesionPolicy: shape_mix needs non-negative weights with positive sum");
        if (count_min < 0 || count_max < count_min) throw InvalidConfig("LesionPolicy: count range invalid");
        if (!(radius_min > 0.0) || radius_max < radius_min) throw InvalidConfig("LesionPolicy: radius range must satisfy 0 < min <= max");
        if (hyper_k_min < 1 || hyper_k_max < hyper_k_min) throw InvalidConfig("LesionPolicy: hyper k range must be integers >= 1");
        const bool pinned = hypo_l_min == hypo_l_max;
        if (pinned ? !(hypo_l_min > 0.0 && hypo_l_min < 1.0)
                   : !(hypo_l_min >= 0.0 && hypo_l_max <= 1.0 && hypo_l_min < hypo_l_max))
            throw InvalidConfig("LesionPolicy: hypo l range must lie inside (0, 1)");
        if (!(margin >= 0.0)) throw InvalidConfig("LesionPolicy: margin must be >= 0");
    }
};

struct PhantomConfig {
    double axial_extent = 60.0;
    double lateral_extent = 40.0;
    double elevational_extent = 10.0;
    double standoff = 30.0;
    double scatterer_density = 4.0;  // per mm^3
    LesionPolicy lesion_policy;

    double volume() const { return axial_extent * lateral_extent * elevational_extent; }
    std::size_t scatterer_count() const {
        return static_cast<std::size_t>(std::llround(scatterer_density * volume()));
    }
    Vec3 box_min() const { return {-0.5 * lateral_extent, -0.5 * elevational_extent, standoff}; }
    Vec3 box_max() const { return {0.5 * lateral_extent, 0.5 * elevational_extent, standoff + axial_extent}; }

    void validate() const {
        if (!(axial_extent > 0.0) || !(lateral_extent > 0.0) || !(elevational_extent > 0.0))
            throw InvalidConfig("PhantomConfig: all extents must be > 0");
        if (!(standoff >= 0.0)) throw InvalidConfig("PhantomConfig: standoff must be >= 0");
        if (!(scatterer_density > 0.0)) throw InvalidConfig("PhantomConfig: scatterer_density must be > 0");
        lesion_policy.validate();
    }
};

struct LesionSpec {
    Echogenicity echogenicity = Echogenicity::hypoechoic;
    LesionShape shape = LesionShape::circle;
    Vec3 center;
    Vec3 radii{1.0, 1.0, 1.0};
    double scale = 1.0;

    bool contains(const Vec3& p) const {
        const double dx = (p.x - center.x) / radii.x;
        const double dy = (p.y - center.y) / radii.y;
        const double dz = (p.z - center.z) / radii.z;
        return dx * dx + dy * dy + dz * dz <= 1.0;
    }

    friend bool operator==(const LesionSpec&, const LesionSpec&) = default;
};

struct Phantom {
    PhantomConfig config;
    std::vector<LesionSpec> lesions;
    std::vector<Vec3> positions;
    std::vector<double> amplitudes;
};

namespace detail {

template <std::size_t N>
std::size_t weighted_pick(Rng& rng, const std::array<double, N>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = unit_uniform(rng) * total;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (weights[i] <= 0.0) continue;
        last = i;
        acc += weights[i];
        if (u < acc) return i;
    }
    return last;
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

inline LesionSpec place_lesion(Rng& rng, const PhantomConfig& cfg, Echogenicity echo) {
    const LesionPolicy& pol = cfg.lesion_policy;
    const Vec3 lo = cfg.box_min();
    const Vec3 hi = cfg.box_max();

    LesionSpec lesion;
    lesion.echogenicity = echo;
    constexpr int max_attempts = 1000;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        lesion.shape = weighted_pick(rng, pol.shape_mix) == 0 ? LesionShape::circle : LesionShape::ellipsoid;
        if (lesion.shape == LesionShape::circle) {
            const double r = uniform(rng, pol.radius_min, pol.radius_max);
            lesion.radii = {r, r, r};
        } else {
            lesion.radii = {uniform(rng, pol.radius_min, pol.radius_max),
                            uniform(rng, pol.radius_min, pol.radius_max),
                            uniform(rng, pol.radius_min, pol.radius_max)};
        }
        // Containment is enforced in the imaged (lateral, axial) plane only;
        // elevationally the lesion is centered on the imaging plane and may
        // extend through the slab faces.
        const double x_lo = lo.x + pol.margin + lesion.radii.x;
        const double x_hi = hi.x - pol.margin - lesion.radii.x;
        const double z_lo = lo.z + pol.margin + lesion.radii.z;
        const double z_hi = hi.z - pol.margin - lesion.radii.z;
        if (x_lo > x_hi || z_lo > z_hi) continue;
        lesion.center = {uniform(rng, x_lo, x_hi), 0.0, uniform(rng, z_lo, z_hi)};

        if (echo == Echogenicity::hyperechoic) {
            lesion.scale = uniform_int(rng, pol.hyper_k_min, pol.hyper_k_max);
        } else if (pol.hypo_l_min == pol.hypo_l_max) {
            lesion.scale = pol.hypo_l_min;
        } else {
            double l;
            do {
                l = uniform(rng, pol.hypo_l_min, pol.hypo_l_max);
            } while (l <= pol.hypo_l_min || l >= pol.hypo_l_max || l <= 0.0);
            lesion.scale = l;
        }
        return lesion;
    }
    throw GeometryInfeasible("no lesion placement inside the phantom margin after 1000 attempts (radius range " +
                             std::to_string(pol.radius_min) + ".." + std::to_string(pol.radius_max) + " mm)");
}

}  // namespace detail

/// Draws the lesion set for one phantom. For a "both" draw the hyperechoic
/// lesions are sampled first, so hypoechoic scaling wins where they overlap.
inline std::vector<LesionSpec> sample_lesions(Rng& rng, const PhantomConfig& cfg) {
    cfg.validate();
    const LesionPolicy& pol = cfg.lesion_policy;
    const auto draw = static_cast<LesionClassDraw>(detail::weighted_pick(rng, pol.class_mix));

    std::vector<LesionSpec> lesions;
    auto add_class = [&](Echogenicity echo) {
        const int count = detail::uniform_int(rng, pol.count_min, pol.count_max);
        for (int i = 0; i < count; ++i) lesions.push_back(detail::place_lesion(rng, cfg, echo));
    };
    if (draw != LesionClassDraw::hypo_only) add_class(Echogenicity::hyperechoic);
    if (draw != LesionClassDraw::hyper_only) add_class(Echogenicity::hypoechoic);
    return lesions;
}

inline double amplitude_factor(const LesionSpec& lesion, ScalingMode mode) {
    return mode == ScalingMode::amplitude ? lesion.scale : std::sqrt(lesion.scale);
}

/// amplitude[i] = base[i] * factor of the last lesion in `lesions` containing
/// position i; unchanged outside every lesion.
inline std::vector<double> apply_lesion_scaling(std::span<const Vec3> positions, std::span<const double> base,
                                                std::span<const LesionSpec> lesions,
                                                ScalingMode mode = ScalingMode::amplitude) {
    if (positions.size() != base.size())
        throw ShapeMismatch("apply_lesion_scaling: positions and amplitudes differ in length");
    std::vector<double> out(base.begin(), base.end());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (auto it = lesions.rbegin(); it != lesions.rend(); ++it) {
            if (it->contains(positions[i])) {
                out[i] = base[i] * amplitude_factor(*it, mode);
                break;
            }
        }
    }
    return out;
}

/// Scatterers are drawn after the lesions from the same stream, so the result
/// is a pure function of the stream state and cfg.
inline Phantom generate_phantom(Rng& rng, const PhantomConfig& cfg) {
    cfg.validate();
    Phantom ph;
    ph.config = cfg;
    ph.lesions = sample_lesions(rng, cfg);

    const std::size_t n = cfg.scatterer_count();
    const Vec3 lo = cfg.box_min();
    const Vec3 hi = cfg.box_max();
    ph.positions.resize(n);
    std::vector<double> base(n);
    for (std::size_t i = 0; i < n; ++i) {
        ph.positions[i] = {uniform(rng, lo.x, hi.x), uniform(rng, lo.y, hi.y), uniform(rng, lo.z, hi.z)};
        base[i] = standard_normal(rng);
    }
    ph.amplitudes = apply_lesion_scaling(ph.positions, base, ph.lesions, cfg.lesion_policy.scaling);
    return ph;
}

inline Phantom generate_phantom(std::uint64_t seed, const PhantomConfig& cfg) {
    Rng rng(seed);
    return generate_phantom(rng, cfg);
}

/// Pixels whose centers fall inside the lesion's cross-section with the
/// elevational midplane (y = 0).
inline void paint_lesion(const LesionSpec& lesion, const ImageGrid& grid, MaskImage& mask) {
    const auto index_range = [](double lo, double hi, double origin, double spacing, std::size_t n) {
        const double a = std::floor((lo - origin) / spacing) - 1.0;
        const double b = std::ceil((hi - origin) / spacing) + 1.0;
        const auto first = static_cast<std::size_t>(std::clamp(a, 0.0, static_cast<double>(n)));
        const auto last = static_cast<std::size_t>(std::clamp(b + 1.0, 0.0, static_cast<double>(n)));
        return std::pair{first, last};
    };
    const auto [r0, r1] = index_range(lesion.center.z - lesion.radii.z, lesion.center.z + lesion.radii.z,
                                      grid.origin_axial, grid.axial_spacing, grid.height);
    const auto [c0, c1] = index_range(lesion.center.x - lesion.radii.x, lesion.center.x + lesion.radii.x,
                                      grid.origin_lateral, grid.lateral_spacing, grid.width);
    for (std::size_t r = r0; r < r1; ++r) {
        const double z = grid.depth_of(r);
        for (std::size_t c = c0; c < c1; ++c) {
            if (lesion.contains({grid.lateral_of(c), 0.0, z})) mask(r, c) = 1;
        }
    }
}

/// Ground-truth mask: only hypoechoic lesions are labeled.
inline MaskImage rasterize_mask(std::span<const LesionSpec> lesions, const ImageGrid& grid) {
    grid.validate();
    MaskImage mask(grid.height, grid.width, 0);
    for (const auto& lesion : lesions) {
        if (lesion.echogenicity == Echogenicity::hypoechoic) paint_lesion(lesion, grid, mask);
    }
    return mask;
}

}  // namespace sonosim

#pragma once

// Pulse-echo B-mode simulation of a point-scatterer phantom.
//
// Each RF line is the sum, over scatterers, of amplitude x lateral weight x
// elevational weight x a Gaussian-windowed cosine pulse delayed by the round
// trip time 2r/c to the line's surface point. Beam sensitivity is a separable
// Gaussian whose FWHM is wavelength * f_number at the transmit focus
// (phantom mid-depth) and grows linearly with |z - z_focus| / z_focus. The
// elevational axis has its own f-number since a linear array focuses in
// elevation with a fixed lens over a short aperture.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "sonosim/error.hpp"
#include "sonosim/fft.hpp"
#include "sonosim/image.hpp"
#include "sonosim/phantom.hpp"
#include "sonosim/random.hpp"

namespace sonosim {

struct AcousticConfig {
    std::size_t n_lines = 50;
    double center_frequency = 3.5e6;     // Hz
    double sampling_frequency = 100e6;   // Hz
    double sound_speed = 1540.0;         // m/s
    double fractional_bandwidth = 0.6;   // -6 dB spectral width / center frequency
    double f_number = 2.0;             // lateral
    double elevation_f_number = 15.0;  // fixed elevation lens
    double dynamic_range_db = 60.0;

    double wavelength_mm() const { return sound_speed / center_frequency * 1e3; }
    double sound_speed_mm() const { return sound_speed * 1e3; }

    void validate() const {
        if (n_lines < 1) throw InvalidConfig("AcousticConfig: n_lines must be >= 1");
        if (!(center_frequency > 0.0)) throw InvalidConfig("AcousticConfig: center_frequency must be > 0");
        if (!(sampling_frequency > 2.0 * center_frequency))
            throw InvalidConfig("AcousticConfig: sampling_frequency must exceed twice the center frequency");
        if (!(sound_speed > 0.0)) throw InvalidConfig("AcousticConfig: sound_speed must be > 0");
        if (!(fractional_bandwidth > 0.0)) throw InvalidConfig("AcousticConfig: fractional_bandwidth must be > 0");
        if (!(f_number > 0.0)) throw InvalidConfig("AcousticConfig: f_number must be > 0");
        if (!(elevation_f_number > 0.0)) throw InvalidConfig("AcousticConfig: elevation_f_number must be > 0");
        if (!(dynamic_range_db > 0.0)) throw InvalidConfig("AcousticConfig: dynamic_range_db must be > 0");
    }
};

/// Beam-space sampling lattice of an RF frame.
struct RfGeometry {
    std::size_t n_lines = 0;
    std::size_t n_samples = 0;
    double first_line_lateral = 0.0;  // mm
    double line_pitch = 0.0;          // mm
    double sampling_frequency = 0.0;  // Hz
    double sound_speed = 0.0;         // m/s
    double t0 = 0.0;                  // s

    double line_lateral(std::size_t line) const {
        return first_line_lateral + static_cast<double>(line) * line_pitch;
    }
    /// Fractional sample index of an on-axis echo from depth z (mm).
    double sample_of_depth(double depth_mm) const {
        return (2.0 * depth_mm / (sound_speed * 1e3) - t0) * sampling_frequency;
    }
    double depth_of_sample(double sample) const {
        return (sample / sampling_frequency + t0) * sound_speed * 1e3 / 2.0;
    }
};

struct RfFrame {
    RealImage samples;  // row = line, column = sample
    AcousticConfig config;
    double line_pitch = 0.0;
    double first_line_lateral = 0.0;
    double t0 = 0.0;

    std::size_t n_lines() const { return samples.height(); }
    std::size_t n_samples() const { return samples.width(); }

    RfGeometry geometry() const {
        return {samples.height(), samples.width(), first_line_lateral, line_pitch,
                config.sampling_frequency, config.sound_speed, t0};
    }
};

struct BModeImage {
    RealImage pixels;
    ImageGrid grid;
};

// -6 dB (half amplitude) full width of a Gaussian is 2 * sqrt(2 ln 2) * sigma.
inline constexpr double fwhm_per_sigma = 2.3548200450309493;

/// Temporal standard deviation (s) of the pulse envelope.
inline double pulse_sigma_seconds(const AcousticConfig& cfg) {
    const double sigma_f = cfg.fractional_bandwidth * cfg.center_frequency / fwhm_per_sigma;
    return 1.0 / (2.0 * std::numbers::pi * sigma_f);
}

/// Samples on each side of the pulse center (support is +-3 sigma).
inline std::size_t pulse_half_width(const AcousticConfig& cfg) {
    return static_cast<std::size_t>(std::ceil(3.0 * pulse_sigma_seconds(cfg) * cfg.sampling_frequency));
}

/// Gaussian-enveloped cosine at the center frequency, length 2h+1 with the
/// unit peak at index h.
inline std::vector<double> pulse_waveform(const AcousticConfig& cfg) {
    cfg.validate();
    const double sigma = pulse_sigma_seconds(cfg);
    const std::size_t h = pulse_half_width(cfg);
    std::vector<double> p(2 * h + 1);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double t = (static_cast<double>(i) - static_cast<double>(h)) / cfg.sampling_frequency;
        p[i] = std::exp(-t * t / (2.0 * sigma * sigma)) * std::cos(2.0 * std::numbers::pi * cfg.center_frequency * t);
    }
    p[h] = 1.0;
    return p;
}

/// Frame length holding the deepest echo plus a full pulse.
inline std::size_t rf_sample_count(const PhantomConfig& phantom, const AcousticConfig& cfg) {
    const double t_max = 2.0 * (phantom.standoff + phantom.axial_extent) / cfg.sound_speed_mm();
    return static_cast<std::size_t>(std::ceil(t_max * cfg.sampling_frequency)) + 2 * pulse_half_width(cfg) + 1;
}

/// Separable Gaussian beam sensitivity. FWHM on each axis is
/// wavelength * f_number at the focus, growing linearly with |z - focus| / focus.
struct BeamProfile {
    double lateral_fwhm_at_focus = 0.0;      // mm
    double elevational_fwhm_at_focus = 0.0;  // mm
    double focus_depth = 0.0;                // mm
    static constexpr double cutoff_sigmas = 4.0;

    double growth(double depth) const { return 1.0 + std::abs(depth - focus_depth) / focus_depth; }
    double lateral_sigma(double depth) const { return lateral_fwhm_at_focus * growth(depth) / fwhm_per_sigma; }
    double elevational_sigma(double depth) const {
        return elevational_fwhm_at_focus * growth(depth) / fwhm_per_sigma;
    }
};

inline BeamProfile beam_profile(const PhantomConfig& phantom, const AcousticConfig& cfg) {
    return {cfg.wavelength_mm() * cfg.f_number, cfg.wavelength_mm() * cfg.elevation_f_number,
            phantom.standoff + 0.5 * phantom.axial_extent};
}

inline double line_pitch_for(const PhantomConfig& phantom, const AcousticConfig& cfg) {
    return cfg.n_lines > 1 ? phantom.lateral_extent / static_cast<double>(cfg.n_lines - 1) : 0.0;
}

inline double first_line_for(const PhantomConfig& phantom, const AcousticConfig& cfg) {
    return cfg.n_lines > 1 ? -0.5 * phantom.lateral_extent : 0.0;
}

/// Pulse-echo summation. Scatterers are visited in ascending lateral position
/// (ties by index) and each line is accumulated by a single thread, so the
/// output is independent of `threads`.
inline RfFrame synthesize_rf(const Phantom& phantom, const AcousticConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    phantom.config.validate();
    if (phantom.positions.size() != phantom.amplitudes.size())
        throw ShapeMismatch("synthesize_rf: positions and amplitudes differ in length");

    const PhantomConfig& pc = phantom.config;
    RfFrame frame;
    frame.config = cfg;
    frame.line_pitch = line_pitch_for(pc, cfg);
    frame.first_line_lateral = first_line_for(pc, cfg);
    frame.t0 = 0.0;
    const std::size_t n_samples = rf_sample_count(pc, cfg);
    frame.samples = RealImage(cfg.n_lines, n_samples, 0.0);

    const std::vector<double> pulse = pulse_waveform(cfg);
    const auto h = static_cast<std::ptrdiff_t>(pulse_half_width(cfg));
    const BeamProfile beam = beam_profile(pc, cfg);
    const double c_mm = cfg.sound_speed_mm();
    const double fs = cfg.sampling_frequency;

    std::vector<std::size_t> order(phantom.positions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return phantom.positions[a].x < phantom.positions[b].x;
    });
    std::vector<double> sorted_x(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted_x[i] = phantom.positions[order[i]].x;

    double sigma_max = 0.0;
    for (const auto& p : phantom.positions) sigma_max = std::max(sigma_max, beam.lateral_sigma(p.z));
    const double reach = BeamProfile::cutoff_sigmas * sigma_max;

    parallel_for(cfg.n_lines, threads, [&](std::size_t line) {
        const double xl = frame.first_line_lateral + static_cast<double>(line) * frame.line_pitch;
        auto out = frame.samples.row(line);
        const auto n_out = static_cast<std::ptrdiff_t>(out.size());
        const auto first = std::lower_bound(sorted_x.begin(), sorted_x.end(), xl - reach) - sorted_x.begin();
        const auto last = std::upper_bound(sorted_x.begin(), sorted_x.end(), xl + reach) - sorted_x.begin();
        for (auto k = first; k < last; ++k) {
            const std::size_t i = order[static_cast<std::size_t>(k)];
            const Vec3& p = phantom.positions[i];
            const double sx = beam.lateral_sigma(p.z);
            const double sy = beam.elevational_sigma(p.z);
            const double dx = p.x - xl;
            if (std::abs(dx) > BeamProfile::cutoff_sigmas * sx || std::abs(p.y) > BeamProfile::cutoff_sigmas * sy)
                continue;
            const double weight = std::exp(-(dx * dx) / (2.0 * sx * sx) - (p.y * p.y) / (2.0 * sy * sy));
            const double gain = phantom.amplitudes[i] * weight;

            const double r = std::sqrt(dx * dx + p.y * p.y + p.z * p.z);
            const double delay = (2.0 * r / c_mm - frame.t0) * fs;
            const double base = std::floor(delay);
            const double frac = delay - base;
            const auto i0 = static_cast<std::ptrdiff_t>(base);
            // out[i0 + m] += gain * pulse(m - frac), pulse linearly interpolated.
            for (std::ptrdiff_t m = -h; m <= h + 1; ++m) {
                const std::ptrdiff_t idx = i0 + m;
                if (idx < 0 || idx >= n_out) continue;
                const std::ptrdiff_t hi = m + h;
                const std::ptrdiff_t lo = hi - 1;
                double v = 0.0;
                if (hi <= 2 * h) v += (1.0 - frac) * pulse[static_cast<std::size_t>(hi)];
                if (lo >= 0) v += frac * pulse[static_cast<std::size_t>(lo)];
                out[static_cast<std::size_t>(idx)] += gain * v;
            }
        }
    });
    return frame;
}

/// Per-line analytic-signal magnitude.
inline RealImage envelope_detect(const RfFrame& rf) {
    RealImage env(rf.n_lines(), rf.n_samples(), 0.0);
    if (rf.n_samples() == 0) return env;
    fft::Transform fwd(rf.n_samples(), fft::Transform::Direction::forward);
    fft::Transform inv(rf.n_samples(), fft::Transform::Direction::backward);
    for (std::size_t line = 0; line < rf.n_lines(); ++line)
        fft::analytic_magnitude(rf.samples.row(line), env.row(line), fwd, inv);
    return env;
}

/// clamp(1 + 20 log10(env / env_max) / DR, 0, 1) with env_max the frame maximum.
inline RealImage log_compress(const RealImage& env, double dynamic_range_db) {
    if (!(dynamic_range_db > 0.0)) throw InvalidConfig("log_compress: dynamic range must be > 0");
    RealImage out(env.height(), env.width(), 0.0);
    double env_max = 0.0;
    for (double v : env.pixels()) {
        if (v < 0.0) throw InvalidConfig("log_compress: envelope must be non-negative");
        env_max = std::max(env_max, v);
    }
    if (env_max <= 0.0) return out;
    auto dst = out.pixels();
    auto src = env.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i] <= 0.0) continue;
        const double db = 20.0 * std::log10(src[i] / env_max);
        dst[i] = std::clamp(1.0 + db / dynamic_range_db, 0.0, 1.0);
    }
    return out;
}

namespace detail {
inline double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
}
}  // namespace detail

/// Bilinear resampling from (line, sample) to the pixel grid. A pixel's line
/// coordinate comes from its lateral position and its sample coordinate from
/// the on-axis round-trip time to its depth.
inline BModeImage scan_convert(const RealImage& compressed, const RfGeometry& geo, const ImageGrid& grid) {
    grid.validate();
    if (compressed.height() != geo.n_lines || compressed.width() != geo.n_samples)
        throw ShapeMismatch("scan_convert: data shape does not match RF geometry");
    if (geo.n_lines == 0 || geo.n_samples == 0) throw EmptyInput("scan_convert: empty RF data");

    constexpr double tol = 1e-9;
    const double max_line = static_cast<double>(geo.n_lines - 1);
    const double max_sample = static_cast<double>(geo.n_samples - 1);

    std::vector<double> line_coord(grid.width);
    for (std::size_t c = 0; c < grid.width; ++c) {
        const double x = grid.lateral_of(c);
        double u;
        if (geo.n_lines == 1) {
            if (std::abs(x - geo.first_line_lateral) > tol) throw GridOutOfBounds("scan_convert: grid column outside the single imaged line");
            u = 0.0;
        } else {
            u = detail::snap((x - geo.first_line_lateral) / geo.line_pitch);
        }
        if (u < -tol || u > max_line + tol)
            throw GridOutOfBounds("scan_convert: grid column " + std::to_string(c) + " lies outside the imaged lines");
        line_coord[c] = std::clamp(u, 0.0, max_line);
    }
    std::vector<double> sample_coord(grid.height);
    for (std::size_t r = 0; r < grid.height; ++r) {
        const double s = detail::snap(geo.sample_of_depth(grid.depth_of(r)));
        if (s < -tol || s > max_sample + tol)
            throw GridOutOfBounds("scan_convert: grid row " + std::to_string(r) + " lies outside the recorded depth range");
        sample_coord[r] = std::clamp(s, 0.0, max_sample);
    }

    BModeImage out{RealImage(grid.height, grid.width, 0.0), grid};
    for (std::size_t r = 0; r < grid.height; ++r) {
        const double s = sample_coord[r];
        const auto s0 = static_cast<std::size_t>(std::floor(s));
        const std::size_t s1 = std::min(s0 + 1, geo.n_samples - 1);
        const double fs = s - static_cast<double>(s0);
        for (std::size_t c = 0; c < grid.width; ++c) {
            const double u = line_coord[c];
            const auto l0 = static_cast<std::size_t>(std::floor(u));
            const std::size_t l1 = std::min(l0 + 1, geo.n_lines - 1);
            const double fl = u - static_cast<double>(l0);
            const double top = (1.0 - fs) * compressed(l0, s0) + fs * compressed(l0, s1);
            const double bottom = (1.0 - fs) * compressed(l1, s0) + fs * compressed(l1, s1);
            const double v = fl == 0.0 ? top : (1.0 - fl) * top + fl * bottom;
            out.pixels(r, c) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

/// Intermediate products of one simulated acquisition.
struct Acquisition {
    Phantom phantom;
    RfFrame rf;
    RealImage envelope;
    BModeImage image;
    MaskImage mask;
};

inline Acquisition acquire(std::uint64_t seed, const PhantomConfig& phantom_cfg, const AcousticConfig& acoustic_cfg,
                           const ImageGrid& grid, unsigned threads = 1) {
    phantom_cfg.validate();
    acoustic_cfg.validate();
    grid.validate();
    Acquisition a;
    a.phantom = generate_phantom(seed, phantom_cfg);
    a.rf = synthesize_rf(a.phantom, acoustic_cfg, threads);
    a.envelope = envelope_detect(a.rf);
    a.image = scan_convert(log_compress(a.envelope, acoustic_cfg.dynamic_range_db), a.rf.geometry(), grid);
    a.mask = rasterize_mask(a.phantom.lesions, grid);
    return a;
}

struct SimulatedImage {
    BModeImage image;
    MaskImage mask;
    std::vector<LesionSpec> lesions;
};

inline SimulatedImage simulate_image(std::uint64_t seed, const PhantomConfig& phantom_cfg,
                                     const AcousticConfig& acoustic_cfg, const ImageGrid& grid,
                                     unsigned threads = 1) {
    Acquisition a = acquire(seed, phantom_cfg, acoustic_cfg, grid, threads);
    return {std::move(a.image), std::move(a.mask), std::move(a.phantom.lesions)};
}

}  // namespace sonosim

namespace sonosim {

struct RegionContrast {
    double lesion_mean = 0.0;
    double ring_mean = 0.0;
    std::size_t lesion_pixels = 0;
    std::size_t ring_pixels = 0;
};

/// Mean image intensity inside a lesion's midplane section versus a
/// surrounding ring of equal area (the section scaled by sqrt 2), excluding
/// pixels inside any lesion in `all`.
inline RegionContrast lesion_contrast(const BModeImage& img, const LesionSpec& lesion,
                                      std::span<const LesionSpec> all) {
    MaskImage inside(img.grid.height, img.grid.width, 0);
    paint_lesion(lesion, img.grid, inside);
    LesionSpec outer = lesion;
    outer.radii.x *= std::numbers::sqrt2;
    outer.radii.z *= std::numbers::sqrt2;
    MaskImage ring(img.grid.height, img.grid.width, 0);
    paint_lesion(outer, img.grid, ring);
    MaskImage any(img.grid.height, img.grid.width, 0);
    for (const auto& l : all) paint_lesion(l, img.grid, any);

    RegionContrast rc;
    double s_in = 0.0, s_ring = 0.0;
    for (std::size_t i = 0; i < inside.size(); ++i) {
        const double v = img.pixels.pixels()[i];
        if (inside.pixels()[i]) {
            s_in += v;
            ++rc.lesion_pixels;
        } else if (ring.pixels()[i] && !any.pixels()[i]) {
            s_ring += v;
            ++rc.ring_pixels;
        }
    }
    if (rc.lesion_pixels) rc.lesion_mean = s_in / static_cast<double>(rc.lesion_pixels);
    if (rc.ring_pixels) rc.ring_mean = s_ring / static_cast<double>(rc.ring_pixels);
    return rc;
}

}  // namespace sonosim

#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

namespace sonosim::fft {

namespace detail {
// FFTW's planner is not reentrant; execution of distinct plans is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// Complex in-place transform of fixed length backed by an FFTW plan.
class Transform {
public:
    enum class Direction { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

    Transform(std::size_t n, Direction dir) : n_(n) {
        buffer_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n == 0 ? 1 : n)));
        std::lock_guard lock(detail::planner_mutex());
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_, static_cast<int>(dir), FFTW_ESTIMATE);
    }
    ~Transform() {
        {
            std::lock_guard lock(detail::planner_mutex());
            fftw_destroy_plan(plan_);
        }
        fftw_free(buffer_);
    }
    Transform(const Transform&) = delete;
    Transform& operator=(const Transform&) = delete;

    std::size_t size() const noexcept { return n_; }

    std::span<std::complex<double>> data() noexcept {
        return {reinterpret_cast<std::complex<double>*>(buffer_), n_};
    }

    void execute() { fftw_execute(plan_); }

private:
    std::size_t n_;
    fftw_complex* buffer_ = nullptr;
    fftw_plan plan_ = nullptr;
};

/// Unnormalized forward DFT of a real sequence.
inline std::vector<std::complex<double>> forward(std::span<const double> x) {
    Transform t(x.size(), Transform::Direction::forward);
    auto d = t.data();
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i];
    t.execute();
    return {d.begin(), d.end()};
}

/// Magnitude of the analytic signal x + i*H(x), with H the discrete Hilbert
/// transform. `fwd` and `inv` must have length x.size().
inline void analytic_magnitude(std::span<const double> x, std::span<double> out, Transform& fwd, Transform& inv) {
    const std::size_t n = x.size();
    auto a = fwd.data();
    for (std::size_t i = 0; i < n; ++i) a[i] = x[i];
    fwd.execute();

    auto b = inv.data();
    b[0] = a[0];
    const std::size_t half = n / 2;
    for (std::size_t k = 1; k < n; ++k) {
        if (k < (n + 1) / 2)
            b[k] = 2.0 * a[k];
        else if (n % 2 == 0 && k == half)
            b[k] = a[k];
        else
            b[k] = 0.0;
    }
    inv.execute();
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(b[i]) * scale;
}

}  // namespace sonosim::fft

#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "afc/errors.hpp"

namespace afc {

/// Uniformly sampled frequency axis. Sample i sits at start + i*spacing.
struct FrequencyGrid {
    double start = 0.0;    ///< absolute frequency of sample 0, Hz
    double spacing = 0.0;  ///< step between samples, Hz (> 0)
    std::size_t count = 0; ///< number of samples (>= 2)

    double freq(std::size_t i) const { return start + static_cast<double>(i) * spacing; }
    double back() const { return freq(count - 1); }
    double span() const { return spacing * static_cast<double>(count - 1); }
    double center() const { return start + 0.5 * span(); }

    bool contains(double nu) const { return nu >= start && nu <= back(); }

    /// Index of the sample closest to nu (clamped to the grid).
    std::size_t nearest_index(double nu) const {
        double x = (nu - start) / spacing;
        if (x <= 0.0) return 0;
        if (x >= static_cast<double>(count - 1)) return count - 1;
        return static_cast<std::size_t>(std::lround(x));
    }

    /// Fractional position of nu on the grid (0 at start).
    double position(double nu) const { return (nu - start) / spacing; }

    bool operator==(const FrequencyGrid& o) const {
        return start == o.start && spacing == o.spacing && count == o.count;
    }
};

inline void validate(const FrequencyGrid& g) {
    if (!(g.spacing > 0.0))
        throw InvalidArgumentError("frequency grid spacing must be > 0, got " +
                                   std::to_string(g.spacing));
    if (g.count < 2)
        throw InvalidArgumentError("frequency grid needs at least 2 samples, got " +
                                   std::to_string(g.count));
}

/// Uniform grid covering [center - span/2, center + span/2] with `count` samples.
inline FrequencyGrid make_grid(double center_hz, double span_hz, std::size_t count) {
    if (!(span_hz > 0.0))
        throw InvalidArgumentError("grid span must be > 0, got " + std::to_string(span_hz));
    if (count < 2)
        throw InvalidArgumentError("grid needs at least 2 samples, got " +
                                   std::to_string(count));
    FrequencyGrid g;
    g.spacing = span_hz / static_cast<double>(count - 1);
    g.start = center_hz - span_hz / 2.0;
    g.count = count;
    return g;
}

}  // namespace afc

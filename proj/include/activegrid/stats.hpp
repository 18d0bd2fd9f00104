// stats.hpp: Mergeable running moments (Welford / Chan).

#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>

namespace activegrid {

struct RunningStats {
    std::size_t n{0};
    double mean{0.0};
    double m2{0.0};

    void add(double x) noexcept {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const RunningStats& o) noexcept {
        if (o.n == 0) {
            return;
        }
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double d = o.mean - mean;
        const double tot = na + nb;
        mean += d * nb / tot;
        m2 += o.m2 + d * d * na * nb / tot;
        n += o.n;
    }

    /// Population standard deviation.
    [[nodiscard]] double stddev() const noexcept {
        return n > 0 ? std::sqrt(std::max(0.0, m2 / static_cast<double>(n))) : 0.0;
    }
};

}  // namespace activegrid

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gliopipe/volume.hpp"

namespace gliopipe::radiomics {

struct PrincipalAxes {
    std::array<double, 3> centroid{};                   // mm
    std::array<double, 3> eigenvalues{};                // descending, mm^2
    std::array<double, 3> axis_lengths{};               // descending, mm
    std::array<std::array<double, 3>, 3> directions{};  // unit vectors, row i for axis i
};

// Second-moment analysis of a voxel region. Axis length i is 2*sqrt(5*lambda_i),
// the inversion of the uniform solid ellipsoid moment (variance along a
// semi-axis a is a^2/5).
inline PrincipalAxes principal_axes(const MaskGrid& mask, const Spacing& spacing) {
    const Dims3 dims = mask.dims();
    std::int64_t n = 0;
    double sx = 0, sy = 0, sz = 0;
    for (int d = 0; d < dims.d; ++d)
        for (int h = 0; h < dims.h; ++h)
            for (int w = 0; w < dims.w; ++w) {
                if (!mask.at(d, h, w)) continue;
                ++n;
                sx += d * spacing.d;
                sy += h * spacing.h;
                sz += w * spacing.w;
            }
    if (n == 0) throw EmptyRegionError("principal_axes of an empty mask");

    PrincipalAxes out;
    out.centroid = {sx / n, sy / n, sz / n};

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int d = 0; d < dims.d; ++d)
        for (int h = 0; h < dims.h; ++h)
            for (int w = 0; w < dims.w; ++w) {
                if (!mask.at(d, h, w)) continue;
                const Eigen::Vector3d p(d * spacing.d - out.centroid[0],
                                        h * spacing.h - out.centroid[1],
                                        w * spacing.w - out.centroid[2]);
                cov += p * p.transpose();
            }
    cov /= static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    // Eigen returns ascending order; report descending.
    for (int i = 0; i < 3; ++i) {
        double lambda = solver.eigenvalues()(2 - i);
        if (lambda < 0 && lambda > -1e-12) lambda = 0;  // clip tiny negatives
        out.eigenvalues[i] = lambda;
        out.axis_lengths[i] = 2.0 * std::sqrt(5.0 * std::max(lambda, 0.0));
        Eigen::Vector3d dir = solver.eigenvectors().col(2 - i);
        // deterministic sign: largest-magnitude component positive
        int arg = 0;
        for (int j = 1; j < 3; ++j)
            if (std::abs(dir(j)) > std::abs(dir(arg))) arg = j;
        if (dir(arg) < 0) dir = -dir;
        out.directions[i] = {dir(0), dir(1), dir(2)};
    }
    return out;
}

struct Eccentricities {
    double meridional = 0.0;  // sqrt(a^2 - c^2) / a
    double equatorial = 0.0;  // sqrt(a^2 - b^2) / a
};

inline Eccentricities eccentricities(double a, double b, double c) {
    if (a <= 0) throw EmptyRegionError("eccentricities need a positive major axis");
    if (a < b || b < c || c < 0)
        throw DataError("axis lengths must satisfy a >= b >= c >= 0");
    Eccentricities e;
    e.meridional = std::sqrt(a * a - c * c) / a;
    e.equatorial = std::sqrt(a * a - b * b) / a;
    return e;
}

// Box-counting dimension. The mask is conceptually padded to a cube of side
// 2^m; boxes of side 2^m .. 1 are counted and the slope of log N vs log(1/s)
// is returned.
inline double fractal_dimension(const MaskGrid& mask) {
    const Dims3 dims = mask.dims();
    if (mask_count(mask) == 0) throw EmptyRegionError("fractal_dimension of an empty mask");
    const int side = std::max(dims.d, std::max(dims.h, dims.w));
    int m = 0;
    while ((1 << m) < side) ++m;

    std::vector<double> log_inv_s, log_n;
    for (int level = m; level >= 0; --level) {
        const int s = 1 << level;
        const int nb = 1 << (m - level);
        std::vector<std::uint8_t> occupied(static_cast<std::size_t>(nb) * nb * nb, 0);
        for (int d = 0; d < dims.d; ++d)
            for (int h = 0; h < dims.h; ++h)
                for (int w = 0; w < dims.w; ++w)
                    if (mask.at(d, h, w))
                        occupied[(static_cast<std::size_t>(d / s) * nb + h / s) * nb + w / s] = 1;
        std::int64_t count = 0;
        for (auto v : occupied) count += v;
        log_inv_s.push_back(-std::log(static_cast<double>(s)));
        log_n.push_back(std::log(static_cast<double>(count)));
    }

    // least-squares slope
    const auto k = static_cast<double>(log_n.size());
    double sx = 0, sy = 0, sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        sx += log_inv_s[i];
        sy += log_n[i];
        sxy += log_inv_s[i] * log_n[i];
        sxx += log_inv_s[i] * log_inv_s[i];
    }
    const double denom = k * sxx - sx * sx;
    if (denom == 0) return 0.0;
    return (k * sxy - sx * sy) / denom;
}

}  // namespace gliopipe::radiomics

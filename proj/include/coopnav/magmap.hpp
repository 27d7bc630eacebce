#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coopnav/errors.hpp"

namespace coopnav {

/// Uniform 2D grid of magnetic anomaly values (nT) with a georeferenced
/// origin at the south-west node. Values are row-major with row 0 at
/// origin_north (rows increase northward). Immutable once built; safe for
/// concurrent reads.
struct MagneticMap {
    double origin_east = 0.0;  // m
    double origin_north = 0.0; // m
    double cell_size = 1.0;    // m, uniform in both axes
    int n_cols = 0;
    int n_rows = 0;
    std::vector<double> values; // nT, n_rows * n_cols

    double at(int row, int col) const {
        return values[static_cast<std::size_t>(row) * n_cols + col];
    }
    double& at(int row, int col) {
        return values[static_cast<std::size_t>(row) * n_cols + col];
    }

    double max_east() const { return origin_east + (n_cols - 1) * cell_size; }
    double max_north() const { return origin_north + (n_rows - 1) * cell_size; }

    bool contains(double east, double north) const {
        return east >= origin_east && east <= max_east() &&
               north >= origin_north && north <= max_north();
    }

    /// Bilinear interpolation of the four surrounding grid nodes; nullopt
    /// when the query lies outside the coverage extent. Hot path of the
    /// particle weight loop, hence inline and branch-light.
    std::optional<double> try_sample(double east, double north) const {
        const double gx = (east - origin_east) / cell_size;
        const double gy = (north - origin_north) / cell_size;
        if (!(gx >= 0.0 && gy >= 0.0 && gx <= n_cols - 1.0 && gy <= n_rows - 1.0))
            return std::nullopt;
        int ix = static_cast<int>(gx);
        int iy = static_cast<int>(gy);
        if (ix > n_cols - 2) ix = n_cols - 2;
        if (iy > n_rows - 2) iy = n_rows - 2;
        const double fx = gx - ix;
        const double fy = gy - iy;
        const double* lo = values.data() + static_cast<std::size_t>(iy) * n_cols + ix;
        const double* hi = lo + n_cols;
        const double v0 = lo[0] + fx * (lo[1] - lo[0]);
        const double v1 = hi[0] + fx * (hi[1] - hi[0]);
        return v0 + fy * (v1 - v0);
    }

    /// Like try_sample but throws OutOfBoundsError outside the extent.
    double sample(double east, double north) const;

    /// Enforce the type invariants (cell_size > 0, >= 2x2, finite values).
    void validate() const;
};

/// Cached-geometry view over a MagneticMap for bulk interpolation (the
/// particle weight loop samples N UAVs x M particles per step). Same
/// semantics as MagneticMap::try_sample with the per-call divisions hoisted.
class GridSampler {
public:
    explicit GridSampler(const MagneticMap& map)
        : values_(map.values.data()), n_cols_(map.n_cols),
          origin_east_(map.origin_east), origin_north_(map.origin_north),
          inv_cell_(1.0 / map.cell_size), max_gx_(map.n_cols - 1.0),
          max_gy_(map.n_rows - 1.0) {}

    std::optional<double> operator()(double east, double north) const {
        const double gx = (east - origin_east_) * inv_cell_;
        const double gy = (north - origin_north_) * inv_cell_;
        if (!(gx >= 0.0 && gy >= 0.0 && gx <= max_gx_ && gy <= max_gy_)) return std::nullopt;
        int ix = static_cast<int>(gx);
        int iy = static_cast<int>(gy);
        if (ix > static_cast<int>(max_gx_) - 1) ix = static_cast<int>(max_gx_) - 1;
        if (iy > static_cast<int>(max_gy_) - 1) iy = static_cast<int>(max_gy_) - 1;
        const double fx = gx - ix;
        const double fy = gy - iy;
        const double* lo = values_ + static_cast<std::size_t>(iy) * n_cols_ + ix;
        const double* hi = lo + n_cols_;
        const double v0 = lo[0] + fx * (lo[1] - lo[0]);
        const double v1 = hi[0] + fx * (hi[1] - hi[0]);
        return v0 + fy * (v1 - v0);
    }

private:
    const double* values_;
    int n_cols_;
    double origin_east_;
    double origin_north_;
    double inv_cell_;
    double max_gx_;
    double max_gy_;
};

/// Recipe for a synthetic anomaly map: a baseline field plus a seeded sum of
/// isotropic Gaussian bumps. Stand-in for survey data; same spec -> bit
/// identical map.
struct SyntheticMapSpec {
    std::uint64_t seed = 0;
    double origin_east = 0.0;
    double origin_north = 0.0;
    double extent_east = 0.0;  // m, > 0
    double extent_north = 0.0; // m, > 0
    double cell_size = 0.0;    // m, > 0
    double baseline = 0.0;     // nT
    int bump_count = 0;
    double bump_amplitude_min = 0.0; // nT
    double bump_amplitude_max = 0.0;
    double bump_sigma_min = 0.0; // m, > 0 when bump_count > 0
    double bump_sigma_max = 0.0;

    void validate() const; // throws InvalidSpecError
};

struct GaussianBump {
    double east = 0.0;
    double north = 0.0;
    double amplitude = 0.0; // nT
    double sigma = 0.0;     // m
};

/// The random half of generate_synthetic: draw bump centers, amplitudes and
/// widths deterministically from spec.seed.
std::vector<GaussianBump> draw_bumps(const SyntheticMapSpec& spec);

/// The deterministic half: baseline plus the Gaussian sum evaluated on the
/// spec's grid.
MagneticMap render_bump_field(const SyntheticMapSpec& spec,
                              const std::vector<GaussianBump>& bumps);

MagneticMap generate_synthetic(const SyntheticMapSpec& spec);

/// Gaussian low-pass of the value matrix (kernel std = smoothing_sigma in
/// meters), same grid geometry. First-order stand-in for the loss of spatial
/// frequency content at higher survey altitude.
MagneticMap degrade_resolution(const MagneticMap& map, double smoothing_sigma);

/// Text grid file I/O. save_grid then load_grid round-trips all fields
/// exactly (values printed with 17 significant digits).
MagneticMap load_grid(const std::string& path);
void save_grid(const MagneticMap& map, const std::string& path);

} // namespace coopnav

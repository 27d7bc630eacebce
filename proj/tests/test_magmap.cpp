#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "coopnav/magmap.hpp"
#include "coopnav/rng.hpp"

using namespace coopnav;

namespace {

MagneticMap constant_map(int cols, int rows, double value, double cell = 100.0) {
    MagneticMap m;
    m.cell_size = cell;
    m.n_cols = cols;
    m.n_rows = rows;
    m.values.assign(static_cast<std::size_t>(cols) * rows, value);
    return m;
}

double matrix_variance(const MagneticMap& m) {
    double mean = 0.0;
    for (double v : m.values) mean += v;
    mean /= static_cast<double>(m.values.size());
    double var = 0.0;
    for (double v : m.values) var += (v - mean) * (v - mean);
    return var / static_cast<double>(m.values.size());
}

// Dense non-separable convolution oracle with the same reflect boundary;
// independent of the separable two-pass implementation.
MagneticMap smooth_oracle(const MagneticMap& map, double sigma_m) {
    const double sigma = sigma_m / map.cell_size;
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    const auto reflect = [](int i, int n) {
        const int period = 2 * n;
        i %= period;
        if (i < 0) i += period;
        return i < n ? i : period - 1 - i;
    };
    std::vector<double> k(2 * radius + 1);
    double ksum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        k[t + radius] = std::exp(-0.5 * t * t / (sigma * sigma));
        ksum += k[t + radius];
    }
    for (double& w : k) w /= ksum;

    MagneticMap out = map;
    for (int r = 0; r < map.n_rows; ++r) {
        for (int c = 0; c < map.n_cols; ++c) {
            double acc = 0.0;
            for (int dr = -radius; dr <= radius; ++dr)
                for (int dc = -radius; dc <= radius; ++dc)
                    acc += k[dr + radius] * k[dc + radius] *
                           map.at(reflect(r + dr, map.n_rows), reflect(c + dc, map.n_cols));
            out.at(r, c) = acc;
        }
    }
    return out;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("sample: constant field") {
    const auto m = constant_map(5, 4, 50.0);
    CHECK(m.sample(0.0, 0.0) == doctest::Approx(50.0));
    CHECK(m.sample(137.5, 212.9) == doctest::Approx(50.0));
    CHECK(m.sample(m.max_east(), m.max_north()) == doctest::Approx(50.0));
}

TEST_CASE("sample: bilinear mean of corners at cell center") {
    MagneticMap m;
    m.cell_size = 100.0;
    m.n_cols = 2;
    m.n_rows = 2;
    m.values = {0.0, 10.0, 20.0, 30.0};
    CHECK(m.sample(50.0, 50.0) == doctest::Approx(15.0));
}

TEST_CASE("sample: node interpolation identity") {
    MagneticMap m;
    m.cell_size = 100.0;
    m.n_cols = 3;
    m.n_rows = 2;
    m.values = {1.0, 42.5, 3.0, 4.0, 5.0, 6.0};
    CHECK(m.sample(100.0, 0.0) == 42.5);
    // every node reproduces its stored value
    for (int r = 0; r < m.n_rows; ++r)
        for (int c = 0; c < m.n_cols; ++c)
            CHECK(m.sample(m.origin_east + c * m.cell_size, m.origin_north + r * m.cell_size) ==
                  doctest::Approx(m.at(r, c)).epsilon(1e-12));
}

TEST_CASE("GridSampler agrees with try_sample everywhere") {
    RandomStream rng(99);
    MagneticMap m;
    m.origin_east = -250.0;
    m.origin_north = 400.0;
    m.cell_size = 37.5;
    m.n_cols = 9;
    m.n_rows = 7;
    m.values.resize(63);
    for (double& v : m.values) v = rng.uniform(-300.0, 300.0);
    const GridSampler sampler(m);
    for (int q = 0; q < 5000; ++q) {
        const double east = rng.uniform(m.origin_east - 50.0, m.max_east() + 50.0);
        const double north = rng.uniform(m.origin_north - 50.0, m.max_north() + 50.0);
        const auto a = m.try_sample(east, north);
        const auto b = sampler(east, north);
        CHECK(a.has_value() == b.has_value());
        if (a && b) CHECK(*a == doctest::Approx(*b).epsilon(1e-12));
    }
}

TEST_CASE("sample: out of bounds throws, try_sample returns nullopt") {
    const auto m = constant_map(3, 3, 1.0);
    CHECK_THROWS_AS((void)m.sample(-0.001, 0.0), OutOfBoundsError);
    CHECK_THROWS_AS((void)m.sample(0.0, 200.001), OutOfBoundsError);
    CHECK_FALSE(m.try_sample(1e9, 0.0).has_value());
    CHECK(m.try_sample(200.0, 200.0).has_value());
}

TEST_CASE("sample: interpolation stays within the enclosing cell's corner range") {
    RandomStream rng(42);
    MagneticMap m;
    m.cell_size = 50.0;
    m.n_cols = 8;
    m.n_rows = 6;
    m.values.resize(48);
    for (double& v : m.values) v = rng.uniform(-300.0, 300.0);
    for (int q = 0; q < 2000; ++q) {
        const double east = rng.uniform(0.0, m.max_east());
        const double north = rng.uniform(0.0, m.max_north());
        const int c = std::min(m.n_cols - 2, static_cast<int>(east / m.cell_size));
        const int r = std::min(m.n_rows - 2, static_cast<int>(north / m.cell_size));
        const double lo = std::min({m.at(r, c), m.at(r, c + 1), m.at(r + 1, c), m.at(r + 1, c + 1)});
        const double hi = std::max({m.at(r, c), m.at(r, c + 1), m.at(r + 1, c), m.at(r + 1, c + 1)});
        const double v = m.sample(east, north);
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
    }
}

TEST_CASE("generate_synthetic: empty bump sum is the baseline") {
    SyntheticMapSpec spec;
    spec.extent_east = 1000.0;
    spec.extent_north = 500.0;
    spec.cell_size = 100.0;
    spec.baseline = 100.0;
    const auto m = generate_synthetic(spec);
    for (double v : m.values) CHECK(v == 100.0);
}

TEST_CASE("generate_synthetic: same spec, same seed, bit-identical") {
    SyntheticMapSpec spec;
    spec.seed = 123456;
    spec.extent_east = 5000.0;
    spec.extent_north = 4000.0;
    spec.cell_size = 100.0;
    spec.bump_count = 25;
    spec.bump_amplitude_min = -200.0;
    spec.bump_amplitude_max = 200.0;
    spec.bump_sigma_min = 150.0;
    spec.bump_sigma_max = 800.0;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    REQUIRE(a.values.size() == b.values.size());
    CHECK(a.values == b.values);

    SyntheticMapSpec other = spec;
    other.seed = 77;
    CHECK(generate_synthetic(other).values != a.values);
}

TEST_CASE("render_bump_field: bump centered at a node contributes exactly its amplitude") {
    SyntheticMapSpec spec;
    spec.extent_east = 2000.0;
    spec.extent_north = 2000.0;
    spec.cell_size = 100.0;
    spec.baseline = 30.0;
    spec.bump_count = 1;
    spec.bump_amplitude_min = spec.bump_amplitude_max = 120.0;
    spec.bump_sigma_min = spec.bump_sigma_max = 300.0;
    const std::vector<GaussianBump> bumps{{700.0, 1200.0, 120.0, 300.0}};
    const auto m = render_bump_field(spec, bumps);
    // oracle: baseline + A * exp(0)
    CHECK(m.sample(700.0, 1200.0) == doctest::Approx(30.0 + 120.0).epsilon(1e-9));
}

TEST_CASE("render_bump_field matches a direct Gaussian-sum evaluation") {
    SyntheticMapSpec spec;
    spec.seed = 5;
    spec.extent_east = 1500.0;
    spec.extent_north = 1200.0;
    spec.cell_size = 100.0;
    spec.baseline = -12.0;
    spec.bump_count = 6;
    spec.bump_amplitude_min = -150.0;
    spec.bump_amplitude_max = 150.0;
    spec.bump_sigma_min = 120.0;
    spec.bump_sigma_max = 500.0;
    const auto bumps = draw_bumps(spec);
    const auto m = render_bump_field(spec, bumps);
    for (int r = 0; r < m.n_rows; ++r) {
        for (int c = 0; c < m.n_cols; ++c) {
            const double e = m.origin_east + c * m.cell_size;
            const double n = m.origin_north + r * m.cell_size;
            double expected = spec.baseline;
            for (const auto& b : bumps) {
                const double d2 = (e - b.east) * (e - b.east) + (n - b.north) * (n - b.north);
                expected += b.amplitude * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
            }
            CHECK(m.at(r, c) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("generate_synthetic: invalid specs are rejected") {
    SyntheticMapSpec spec;
    spec.extent_east = -5.0;
    spec.extent_north = 100.0;
    spec.cell_size = 10.0;
    CHECK_THROWS_AS((void)generate_synthetic(spec), InvalidSpecError);
    spec.extent_east = 100.0;
    spec.cell_size = 0.0;
    CHECK_THROWS_AS((void)generate_synthetic(spec), InvalidSpecError);
    spec.cell_size = 10.0;
    spec.bump_count = 3;
    spec.bump_sigma_min = 0.0; // sigma lower bound must be positive
    spec.bump_sigma_max = 10.0;
    CHECK_THROWS_AS((void)generate_synthetic(spec), InvalidSpecError);
}

TEST_CASE("degrade_resolution: zero sigma and constant maps are identities") {
    SyntheticMapSpec spec;
    spec.seed = 9;
    spec.extent_east = 3000.0;
    spec.extent_north = 2000.0;
    spec.cell_size = 100.0;
    spec.bump_count = 10;
    spec.bump_amplitude_min = -100.0;
    spec.bump_amplitude_max = 100.0;
    spec.bump_sigma_min = 150.0;
    spec.bump_sigma_max = 600.0;
    const auto m = generate_synthetic(spec);
    CHECK(degrade_resolution(m, 0.0).values == m.values);

    const auto flat = constant_map(6, 5, 77.0);
    const auto smoothed = degrade_resolution(flat, 250.0);
    for (double v : smoothed.values) CHECK(v == doctest::Approx(77.0).epsilon(1e-12));
}

TEST_CASE("degrade_resolution matches the dense convolution oracle and shrinks variance") {
    SyntheticMapSpec spec;
    spec.seed = 31;
    spec.extent_east = 2000.0;
    spec.extent_north = 1500.0;
    spec.cell_size = 100.0;
    spec.bump_count = 1;
    spec.bump_amplitude_min = spec.bump_amplitude_max = 200.0;
    spec.bump_sigma_min = spec.bump_sigma_max = 250.0;
    const auto m = generate_synthetic(spec);

    const double sigma = 200.0; // 2 cells
    const auto fast = degrade_resolution(m, sigma);
    const auto oracle = smooth_oracle(m, sigma);
    REQUIRE(fast.values.size() == oracle.values.size());
    for (std::size_t i = 0; i < fast.values.size(); ++i)
        CHECK(fast.values[i] == doctest::Approx(oracle.values[i]).epsilon(1e-12));

    CHECK(matrix_variance(fast) < matrix_variance(m));
}

TEST_CASE("degrade_resolution never increases variance") {
    RandomStream rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        MagneticMap m;
        m.cell_size = 100.0;
        m.n_cols = 10 + rep;
        m.n_rows = 6 + rep % 3;
        m.values.resize(static_cast<std::size_t>(m.n_cols) * m.n_rows);
        for (double& v : m.values) v = rng.uniform(-500.0, 500.0);
        const double sigma = rng.uniform(20.0, 400.0);
        CHECK(matrix_variance(degrade_resolution(m, sigma)) <=
              matrix_variance(m) + 1e-12);
    }
}

TEST_CASE("grid file: save/load round trip is exact") {
    SyntheticMapSpec spec;
    spec.seed = 2024;
    spec.origin_east = -350.25;
    spec.origin_north = 1200.5;
    spec.extent_east = 1700.0;
    spec.extent_north = 900.0;
    spec.cell_size = 85.0;
    spec.baseline = 17.3;
    spec.bump_count = 8;
    spec.bump_amplitude_min = -90.0;
    spec.bump_amplitude_max = 220.0;
    spec.bump_sigma_min = 100.0;
    spec.bump_sigma_max = 400.0;
    const auto m = generate_synthetic(spec);

    const auto path = temp_file("coopnav_roundtrip.grid");
    save_grid(m, path.string());
    const auto loaded = load_grid(path.string());
    CHECK(loaded.origin_east == m.origin_east);
    CHECK(loaded.origin_north == m.origin_north);
    CHECK(loaded.cell_size == m.cell_size);
    CHECK(loaded.n_cols == m.n_cols);
    CHECK(loaded.n_rows == m.n_rows);
    CHECK(loaded.values == m.values);
    std::filesystem::remove(path);
}

TEST_CASE("grid file: hand-written 2x2 transcribes north-most row first") {
    const auto path = temp_file("coopnav_tiny.grid");
    {
        std::ofstream out(path);
        out << "ncols 2\nnrows 2\norigin_east 0\norigin_north 0\ncellsize 100\n"
            << "1 2\n3 4\n";
    }
    const auto m = load_grid(path.string());
    // first body line is the northern row
    CHECK(m.at(1, 0) == 1.0);
    CHECK(m.at(1, 1) == 2.0);
    CHECK(m.at(0, 0) == 3.0);
    CHECK(m.at(0, 1) == 4.0);
    CHECK(m.sample(0.0, 100.0) == 1.0);
    std::filesystem::remove(path);
}

TEST_CASE("grid file: dimension and parse errors carry diagnostics") {
    const auto path = temp_file("coopnav_bad.grid");
    {
        std::ofstream out(path);
        out << "ncols 4\nnrows 2\norigin_east 0\norigin_north 0\ncellsize 100\n"
            << "1 2 3\n4 5 6\n"; // rows of 3 values, header says 4
    }
    CHECK_THROWS_AS((void)load_grid(path.string()), DimensionMismatchError);

    {
        std::ofstream out(path);
        out << "ncols 2\nnrows 2\norigin_east 0\norigin_north 0\ncellsize 100\n"
            << "1 oops\n3 4\n";
    }
    CHECK_THROWS_AS((void)load_grid(path.string()), ParseError);

    {
        std::ofstream out(path);
        out << "ncols 2\nnrows 2\norigin_east 0\ncellsize 100\n1 2\n3 4\n"; // missing header
    }
    CHECK_THROWS_AS((void)load_grid(path.string()), ParseError);
    std::filesystem::remove(path);
}

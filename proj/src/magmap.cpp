#include "coopnav/magmap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coopnav/rng.hpp"

namespace coopnav {

double MagneticMap::sample(double east, double north) const {
    const auto v = try_sample(east, north);
    if (!v) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "query (%.3f, %.3f) outside map extent [%.3f, %.3f] x [%.3f, %.3f]",
                      east, north, origin_east, max_east(), origin_north, max_north());
        throw OutOfBoundsError(msg);
    }
    return *v;
}

void MagneticMap::validate() const {
    if (!(cell_size > 0.0)) throw InvalidSpecError("map cell_size must be > 0");
    if (n_cols < 2 || n_rows < 2) throw InvalidSpecError("map must be at least 2x2");
    if (values.size() != static_cast<std::size_t>(n_cols) * n_rows)
        throw InvalidSpecError("map value matrix does not match n_rows x n_cols");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidSpecError("map contains a non-finite value");
}

void SyntheticMapSpec::validate() const {
    if (!(extent_east > 0.0) || !(extent_north > 0.0))
        throw InvalidSpecError("synthetic map extent must be positive");
    if (!(cell_size > 0.0)) throw InvalidSpecError("synthetic map cell_size must be > 0");
    if (!std::isfinite(baseline)) throw InvalidSpecError("baseline must be finite");
    if (bump_count < 0) throw InvalidSpecError("bump_count must be >= 0");
    if (bump_count > 0) {
        if (!(bump_sigma_min > 0.0) || bump_sigma_max < bump_sigma_min)
            throw InvalidSpecError("bump sigma range must satisfy 0 < min <= max");
        if (!std::isfinite(bump_amplitude_min) || !std::isfinite(bump_amplitude_max) ||
            bump_amplitude_max < bump_amplitude_min)
            throw InvalidSpecError("bump amplitude range must be a finite interval");
    }
}

std::vector<GaussianBump> draw_bumps(const SyntheticMapSpec& spec) {
    spec.validate();
    RandomStream stream(mix_seed(spec.seed, 0x6d61676d61700ULL));
    std::vector<GaussianBump> bumps;
    bumps.reserve(spec.bump_count);
    for (int i = 0; i < spec.bump_count; ++i) {
        GaussianBump b;
        b.east = stream.uniform(spec.origin_east, spec.origin_east + spec.extent_east);
        b.north = stream.uniform(spec.origin_north, spec.origin_north + spec.extent_north);
        b.amplitude = stream.uniform(spec.bump_amplitude_min, spec.bump_amplitude_max);
        b.sigma = stream.uniform(spec.bump_sigma_min, spec.bump_sigma_max);
        bumps.push_back(b);
    }
    return bumps;
}

MagneticMap render_bump_field(const SyntheticMapSpec& spec,
                              const std::vector<GaussianBump>& bumps) {
    spec.validate();
    MagneticMap map;
    map.origin_east = spec.origin_east;
    map.origin_north = spec.origin_north;
    map.cell_size = spec.cell_size;
    map.n_cols = static_cast<int>(std::ceil(spec.extent_east / spec.cell_size)) + 1;
    map.n_rows = static_cast<int>(std::ceil(spec.extent_north / spec.cell_size)) + 1;
    map.values.assign(static_cast<std::size_t>(map.n_cols) * map.n_rows, spec.baseline);

    // Each bump is rendered on an 8-sigma window; the truncated tail is
    // below 1e-14 of the amplitude.
    for (const auto& b : bumps) {
        const double inv_two_sigma2 = 1.0 / (2.0 * b.sigma * b.sigma);
        const double reach = 8.0 * b.sigma;
        const int col_lo = std::max(0, static_cast<int>(std::floor((b.east - reach - map.origin_east) / map.cell_size)));
        const int col_hi = std::min(map.n_cols - 1, static_cast<int>(std::ceil((b.east + reach - map.origin_east) / map.cell_size)));
        const int row_lo = std::max(0, static_cast<int>(std::floor((b.north - reach - map.origin_north) / map.cell_size)));
        const int row_hi = std::min(map.n_rows - 1, static_cast<int>(std::ceil((b.north + reach - map.origin_north) / map.cell_size)));
        for (int r = row_lo; r <= row_hi; ++r) {
            const double dn = map.origin_north + r * map.cell_size - b.north;
            for (int c = col_lo; c <= col_hi; ++c) {
                const double de = map.origin_east + c * map.cell_size - b.east;
                map.at(r, c) += b.amplitude * std::exp(-(de * de + dn * dn) * inv_two_sigma2);
            }
        }
    }
    return map;
}

MagneticMap generate_synthetic(const SyntheticMapSpec& spec) {
    return render_bump_field(spec, draw_bumps(spec));
}

namespace {

// Half-sample symmetric ("reflect") index for out-of-range taps. With this
// extension a normalized kernel preserves the mean exactly and cannot
// increase the value-matrix variance.
int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

std::vector<double> gaussian_kernel(double sigma_cells) {
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma_cells)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        const double w = std::exp(-0.5 * (t / sigma_cells) * (t / sigma_cells));
        k[t + radius] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

} // namespace

MagneticMap degrade_resolution(const MagneticMap& map, double smoothing_sigma) {
    map.validate();
    if (smoothing_sigma < 0.0) throw InvalidSpecError("smoothing_sigma must be >= 0");
    if (smoothing_sigma == 0.0) return map;

    const auto kernel = gaussian_kernel(smoothing_sigma / map.cell_size);
    const int radius = static_cast<int>(kernel.size() / 2);
    MagneticMap out = map;
    std::vector<double> tmp(map.values.size());

    // horizontal pass
    for (int r = 0; r < map.n_rows; ++r) {
        for (int c = 0; c < map.n_cols; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += kernel[t + radius] * map.at(r, reflect_index(c + t, map.n_cols));
            tmp[static_cast<std::size_t>(r) * map.n_cols + c] = acc;
        }
    }
    // vertical pass
    for (int r = 0; r < map.n_rows; ++r) {
        for (int c = 0; c < map.n_cols; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += kernel[t + radius] *
                       tmp[static_cast<std::size_t>(reflect_index(r + t, map.n_rows)) * map.n_cols + c];
            out.at(r, c) = acc;
        }
    }
    return out;
}

namespace {

double parse_double_token(const std::string& token, int line_no, const char* what) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
        std::ostringstream msg;
        msg << "line " << line_no << ": cannot parse " << what << " from '" << token << "'";
        throw ParseError(msg.str());
    }
    return value;
}

std::string read_header_value(std::istream& in, const char* key, int& line_no) {
    std::string line;
    if (!std::getline(in, line)) {
        std::ostringstream msg;
        msg << "line " << line_no + 1 << ": missing header line '" << key << "'";
        throw ParseError(msg.str());
    }
    ++line_no;
    std::istringstream ls(line);
    std::string k, v, extra;
    ls >> k >> v;
    if (k != key || v.empty() || (ls >> extra)) {
        std::ostringstream msg;
        msg << "line " << line_no << ": expected '" << key << " <value>', got '" << line << "'";
        throw ParseError(msg.str());
    }
    return v;
}

} // namespace

MagneticMap load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open grid file: " + path);

    int line_no = 0;
    MagneticMap map;
    const std::string ncols = read_header_value(in, "ncols", line_no);
    const std::string nrows = read_header_value(in, "nrows", line_no);
    map.n_cols = static_cast<int>(parse_double_token(ncols, 1, "ncols"));
    map.n_rows = static_cast<int>(parse_double_token(nrows, 2, "nrows"));
    map.origin_east = parse_double_token(read_header_value(in, "origin_east", line_no), 3, "origin_east");
    map.origin_north = parse_double_token(read_header_value(in, "origin_north", line_no), 4, "origin_north");
    map.cell_size = parse_double_token(read_header_value(in, "cellsize", line_no), 5, "cellsize");

    if (map.n_cols < 2 || map.n_rows < 2)
        throw DimensionMismatchError("header declares a grid smaller than 2x2");

    map.values.assign(static_cast<std::size_t>(map.n_cols) * map.n_rows, 0.0);

    // body: north-most row first
    std::string line;
    for (int r = map.n_rows - 1; r >= 0; --r) {
        if (!std::getline(in, line)) {
            std::ostringstream msg;
            msg << "body ends after " << map.n_rows - 1 - r << " rows, header declares "
                << map.n_rows;
            throw DimensionMismatchError(msg.str());
        }
        ++line_no;
        std::istringstream ls(line);
        std::string token;
        int c = 0;
        while (ls >> token) {
            if (c >= map.n_cols) {
                std::ostringstream msg;
                msg << "line " << line_no << ": row has more than " << map.n_cols << " values";
                throw DimensionMismatchError(msg.str());
            }
            map.at(r, c) = parse_double_token(token, line_no, "grid value");
            ++c;
        }
        if (c != map.n_cols) {
            std::ostringstream msg;
            msg << "line " << line_no << ": row has " << c << " values, header declares "
                << map.n_cols;
            throw DimensionMismatchError(msg.str());
        }
    }
    // trailing content other than whitespace is a dimension mismatch
    std::string token;
    while (in >> token) {
        std::ostringstream msg;
        msg << "unexpected trailing token '" << token << "' after " << map.n_rows << " rows";
        throw DimensionMismatchError(msg.str());
    }

    try {
        map.validate();
    } catch (const InvalidSpecError& e) {
        throw ParseError(std::string("invalid grid: ") + e.what());
    }
    return map;
}

void save_grid(const MagneticMap& map, const std::string& path) {
    map.validate();
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ParseError("cannot open grid file for writing: " + path);
    std::fprintf(f, "ncols %d\n", map.n_cols);
    std::fprintf(f, "nrows %d\n", map.n_rows);
    std::fprintf(f, "origin_east %.17g\n", map.origin_east);
    std::fprintf(f, "origin_north %.17g\n", map.origin_north);
    std::fprintf(f, "cellsize %.17g\n", map.cell_size);
    for (int r = map.n_rows - 1; r >= 0; --r) {
        for (int c = 0; c < map.n_cols; ++c)
            std::fprintf(f, c == 0 ? "%.17g" : " %.17g", map.at(r, c));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

} // namespace coopnav

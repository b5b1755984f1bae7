#include "pim/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pim/errors.hpp"
#include "pim/neighbor_index.hpp"

namespace pim {

namespace {

// splitmix64; keeps sampling reproducible across platforms, unlike the
// standard distributions.
struct Rng {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, int line_no) {
    try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw FormatError("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
    }
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

int PointCloud::boundary_count() const {
    return static_cast<int>(std::count_if(boundary_flag.begin(), boundary_flag.end(),
                                          [](char c) { return c != 0; }));
}

void PointCloud::validate() const {
    const int n = size();
    if (n < 1) throw ParameterError("PointCloud: empty");
    if (intrinsic_dim < 1 || intrinsic_dim > ambient_dim()) {
        throw ParameterError("PointCloud: need 1 <= k <= d");
    }
    if (static_cast<int>(boundary_flag.size()) != n) {
        throw ParameterError("PointCloud: boundary flag count mismatch");
    }
    if (!coords.allFinite()) {
        throw ParameterError("PointCloud: non-finite coordinate");
    }
    if (volume_weight.size() != 0) {
        if (volume_weight.size() != n || (volume_weight.array() < 0.0).any() ||
            !volume_weight.allFinite()) {
            throw ParameterError("PointCloud: bad volume weights");
        }
    }
    if (boundary_weight.size() != 0 && boundary_weight.size() != n) {
        throw ParameterError("PointCloud: bad boundary weights");
    }
}

namespace {

PointCloud parse_rows(const std::vector<std::vector<std::string>>& rows,
                      const std::vector<int>& line_nos, int d, int k) {
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw FormatError("no data rows");
    const int cols = static_cast<int>(rows[0].size());
    if (cols != d + 1 && cols != d + 2 && cols != d + 3) {
        throw FormatError("line " + std::to_string(line_nos[0]) + ": expected " +
                          std::to_string(d + 1) + ".." + std::to_string(d + 3) +
                          " columns, got " + std::to_string(cols));
    }
    PointCloud cloud;
    cloud.coords.resize(n, d);
    cloud.intrinsic_dim = k;
    cloud.boundary_flag.resize(static_cast<size_t>(n), 0);
    if (cols >= d + 2) cloud.volume_weight.resize(n);
    if (cols == d + 3) cloud.boundary_weight = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != cols) {
            throw FormatError("line " + std::to_string(line_nos[i]) +
                              ": inconsistent column count");
        }
        for (int a = 0; a < d; ++a) {
            cloud.coords(i, a) = parse_double(rows[i][static_cast<size_t>(a)], line_nos[i]);
        }
        const double flag = parse_double(rows[i][static_cast<size_t>(d)], line_nos[i]);
        cloud.boundary_flag[static_cast<size_t>(i)] = flag != 0.0 ? 1 : 0;
        if (cols >= d + 2) {
            cloud.volume_weight[i] = parse_double(rows[i][static_cast<size_t>(d + 1)], line_nos[i]);
        }
        if (cols == d + 3) {
            cloud.boundary_weight[i] = parse_double(rows[i][static_cast<size_t>(d + 2)], line_nos[i]);
        }
    }
    cloud.validate();
    return cloud;
}

PointCloud load_xyzb(std::istream& in) {
    std::string line;
    int line_no = 0;
    int d = -1, k = -1;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_nos;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto toks = split_ws(line.substr(1));
            if (toks.size() == 3 && toks[0] == "dim") {
                d = static_cast<int>(parse_double(toks[1], line_no));
                k = static_cast<int>(parse_double(toks[2], line_no));
            }
            continue;
        }
        rows.push_back(split_ws(line));
        line_nos.push_back(line_no);
    }
    if (d < 1) throw FormatError("missing or bad '#dim d k' header");
    return parse_rows(rows, line_nos, d, k);
}

PointCloud load_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw FormatError("empty csv");
    ++line_no;
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string tok;
        while (std::getline(hs, tok, ',')) header.push_back(tok);
    }
    int d = 0;
    while (d < static_cast<int>(header.size()) &&
           header[static_cast<size_t>(d)] == "x" + std::to_string(d)) {
        ++d;
    }
    if (d < 1) throw FormatError("csv header must start with x0,x1,...");
    int expect = d;
    bool has_flag = false, has_v = false, has_s = false;
    if (expect < static_cast<int>(header.size()) && header[static_cast<size_t>(expect)] == "boundary") {
        has_flag = true;
        ++expect;
    }
    if (!has_flag) throw FormatError("csv header missing 'boundary' column");
    if (expect < static_cast<int>(header.size()) && header[static_cast<size_t>(expect)] == "volume") {
        has_v = true;
        ++expect;
    }
    if (expect < static_cast<int>(header.size()) && header[static_cast<size_t>(expect)] == "bweight") {
        has_s = true;
        ++expect;
    }
    if (expect != static_cast<int>(header.size())) {
        throw FormatError("csv header has unknown trailing columns");
    }
    (void)has_v;
    (void)has_s;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_nos;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> toks;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) toks.push_back(tok);
        rows.push_back(std::move(toks));
        line_nos.push_back(line_no);
    }
    // csv rows carry the same column layout as xyzb rows
    return parse_rows(rows, line_nos, d, 2 <= d ? 2 : d);
}

} // namespace

PointCloud load_cloud(const std::string& path, CloudFormat format) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    try {
        return format == CloudFormat::xyzb ? load_xyzb(in) : load_csv(in);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    } catch (const ParameterError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format) {
    cloud.validate();
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    const int n = cloud.size();
    const int d = cloud.ambient_dim();
    const bool has_v = cloud.has_volume_weights();
    const bool has_s = cloud.has_boundary_weights();
    if (format == CloudFormat::xyzb) {
        out << "#dim " << d << ' ' << cloud.intrinsic_dim << '\n';
    } else {
        for (int a = 0; a < d; ++a) out << 'x' << a << ',';
        out << "boundary";
        if (has_v) out << ",volume";
        if (has_s) out << ",bweight";
        out << '\n';
    }
    const char sep = format == CloudFormat::xyzb ? ' ' : ',';
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < d; ++a) out << fmt_double(cloud.coords(i, a)) << sep;
        out << (cloud.is_boundary(i) ? 1 : 0);
        if (has_v) out << sep << fmt_double(cloud.volume_weight[i]);
        if (has_s) out << sep << fmt_double(cloud.boundary_weight[i]);
        out << '\n';
    }
}

PointCloud sample_unit_disk(int n_target, std::uint64_t seed) {
    if (n_target < 16) {
        throw ParameterError("sample_unit_disk: n_target must be >= 16");
    }
    constexpr double pi = std::numbers::pi;
    const int rings = std::max(2, static_cast<int>(std::lround(
        std::sqrt(static_cast<double>(n_target) / pi + 1.0) - 1.0)));
    Rng rng{seed * 0x9e3779b97f4a7c15ull + 0x243f6a8885a308d3ull};

    std::vector<Eigen::Vector2d> pts;
    std::vector<char> flags;
    pts.emplace_back(0.0, 0.0);
    flags.push_back(0);
    for (int j = 1; j <= rings; ++j) {
        const double r = (j - 0.5) / rings;
        const int count = std::max(1, static_cast<int>(std::lround(2.0 * pi * r * rings)));
        const double phase = rng.uniform(0.0, 2.0 * pi);
        for (int i = 0; i < count; ++i) {
            const double th = phase + 2.0 * pi * i / count +
                              rng.uniform(-0.25, 0.25) * 2.0 * pi / count;
            double rr = r + rng.uniform(-0.25, 0.25) / rings;
            rr = std::min(rr, 1.0 - 0.5 / rings);
            pts.emplace_back(rr * std::cos(th), rr * std::sin(th));
            flags.push_back(0);
        }
    }
    const int n_boundary = static_cast<int>(std::lround(2.0 * pi * rings));
    const double phase = rng.uniform(0.0, 2.0 * pi);
    for (int i = 0; i < n_boundary; ++i) {
        const double th = phase + 2.0 * pi * i / n_boundary;
        pts.emplace_back(std::cos(th), std::sin(th));
        flags.push_back(1);
    }

    PointCloud cloud;
    cloud.coords.resize(static_cast<int>(pts.size()), 2);
    for (size_t i = 0; i < pts.size(); ++i) {
        cloud.coords.row(static_cast<int>(i)) = pts[i].transpose();
    }
    cloud.intrinsic_dim = 2;
    cloud.boundary_flag = std::move(flags);
    cloud.validate();
    return cloud;
}

SamplingStats estimate_fill_distance(const PointCloud& cloud, const NeighborIndex& index) {
    const int n = cloud.size();
    if (n < 2) throw ParameterError("estimate_fill_distance: need at least 2 points");
    SamplingStats stats;
    stats.fill_distance = 0.0;
    stats.min_spacing = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double d = index.nearest_distance(cloud.coords.row(i).transpose(), i);
        stats.fill_distance = std::max(stats.fill_distance, d);
        stats.min_spacing = std::min(stats.min_spacing, d);
    }
    if (stats.fill_distance <= 0.0) {
        throw GeometryError("estimate_fill_distance: all points coincident");
    }
    return stats;
}

} // namespace pim

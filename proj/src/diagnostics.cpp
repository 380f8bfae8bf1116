#include "sdm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "sdm/errors.hpp"

namespace sdm {

double VelocityHistogram::mode() const {
    if (frequency.empty()) throw EstimatorError("empty histogram");
    const auto it = std::max_element(frequency.begin(), frequency.end());
    const auto b = static_cast<std::size_t>(it - frequency.begin());
    return 0.5 * (edges[b] + edges[b + 1]);
}

VelocityHistogram velocity_histogram(std::span<const Particle> particles, const CartesianGrid& grid,
                                     const Vec3& probe, double bin_width, std::array<int, 3> half_extent) {
    if (!(bin_width > 0.0)) throw ConfigError("histogram bin width must be positive");
    const CellIndex centre = grid.cell_index(probe);
    const int c[3] = {centre.i, centre.j, centre.k};
    std::vector<double> u;
    for (const Particle& p : particles) {
        const CellIndex ci = grid.cell_index(p.position);
        const int idx[3] = {ci.i, ci.j, ci.k};
        bool inside = true;
        for (int a = 0; a < 3; ++a) {
            if (std::abs(idx[a] - c[a]) > half_extent[static_cast<std::size_t>(a)]) inside = false;
        }
        if (inside) u.push_back(p.velocity.x);
    }
    if (u.empty()) throw EstimatorError("histogram neighbourhood holds no particles");
    const auto [lo_it, hi_it] = std::minmax_element(u.begin(), u.end());
    const double first = std::floor(*lo_it / bin_width);
    const auto bins = static_cast<std::size_t>(std::floor(*hi_it / bin_width) - first) + 1;
    VelocityHistogram h;
    h.probe = probe;
    h.half_extent = half_extent;
    h.samples = u.size();
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = (first + static_cast<double>(b)) * bin_width;
    std::vector<std::size_t> counts(bins, 0);
    for (double v : u) {
        const auto b = static_cast<std::size_t>(
            std::clamp(std::floor(v / bin_width) - first, 0.0, static_cast<double>(bins - 1)));
        ++counts[b];
    }
    h.frequency.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        h.frequency[b] = static_cast<double>(counts[b]) / static_cast<double>(u.size());
    }
    return h;
}

void write_histogram_csv(const VelocityHistogram& h, std::ostream& out) {
    out << "u_low,u_high,frequency\n" << std::setprecision(9);
    for (std::size_t b = 0; b < h.frequency.size(); ++b) {
        out << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.frequency[b] << '\n';
    }
}

double turbulence_intensity(double k, double hub_speed) {
    if (!(hub_speed > 0.0)) throw ConfigError("hub speed must be positive");
    return std::sqrt(2.0 * std::max(k, 0.0) / 3.0) / hub_speed;
}

std::vector<double> turbulence_intensity(std::span<const double> k, double hub_speed) {
    std::vector<double> out;
    out.reserve(k.size());
    for (double v : k) out.push_back(turbulence_intensity(v, hub_speed));
    return out;
}

ProfileSet extract_profiles(const CartesianGrid& grid, std::span<const CellRecord> records, const Vec3& hub,
                            double diameter, std::span<const double> stations, double hub_speed) {
    if (records.size() != grid.num_cells()) throw ConfigError("field size does not match the grid");
    ProfileSet set;
    const Box box = grid.box();
    for (double s : stations) {
        const Vec3 at{hub.x + s * diameter, hub.y, box.lo.z};
        if (!(at.x >= box.lo.x && at.x < box.hi.x && at.y >= box.lo.y && at.y < box.hi.y)) {
            set.skipped.push_back(s);
            continue;
        }
        const CellIndex ci = grid.cell_index(at);
        StationProfile st;
        st.diameters = s;
        st.x = at.x;
        for (int k = 0; k < grid.nz(); ++k) {
            const CellRecord& r = records[grid.linear(ci.i, ci.j, k)];
            st.points.push_back({grid.cell_center(CellIndex{ci.i, ci.j, k}).z, r.mean.x,
                                 turbulence_intensity(r.tke, hub_speed), -r.moments.xz});
        }
        set.stations.push_back(std::move(st));
    }
    return set;
}

void write_profiles_csv(const ProfileSet& profiles, std::ostream& out) {
    out << "station_D,x,z,u,I,minus_uw\n" << std::setprecision(9);
    for (const StationProfile& st : profiles.stations) {
        for (const ProfilePoint& p : st.points) {
            out << st.diameters << ',' << st.x << ',' << p.z << ',' << p.u << ',' << p.intensity << ','
                << p.minus_uw << '\n';
        }
    }
}

void write_fields_csv(const CartesianGrid& grid, std::span<const CellRecord> records, std::ostream& out,
                      std::optional<int> y_slice) {
    if (records.size() != grid.num_cells()) throw ConfigError("field size does not match the grid");
    out << "x,y,z,u,v,w,uu,vv,ww,uv,uw,vw,k,eps\n" << std::setprecision(9);
    for (std::size_t c = 0; c < records.size(); ++c) {
        const CellIndex ci = grid.unravel(c);
        if (y_slice && ci.j != *y_slice) continue;
        const Vec3 x = grid.cell_center(ci);
        const CellRecord& r = records[c];
        const SymTensor& m = r.moments;
        out << x.x << ',' << x.y << ',' << x.z << ',' << r.mean.x << ',' << r.mean.y << ',' << r.mean.z << ','
            << m.xx << ',' << m.yy << ',' << m.zz << ',' << m.xy << ',' << m.xz << ',' << m.yz << ',' << r.tke << ','
            << r.dissipation << '\n';
    }
}

void write_fields_vtk(const CartesianGrid& grid, std::span<const CellRecord> records, std::ostream& out) {
    if (records.size() != grid.num_cells()) throw ConfigError("field size does not match the grid");
    const Vec3 first = grid.cell_center(std::size_t{0});
    const Vec3& d = grid.spacing();
    out << std::setprecision(9);
    out << "# vtk DataFile Version 3.0\nsdm cell fields\nASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << grid.nx() << ' ' << grid.ny() << ' ' << grid.nz() << '\n';
    out << "ORIGIN " << first.x << ' ' << first.y << ' ' << first.z << '\n';
    out << "SPACING " << d.x << ' ' << d.y << ' ' << d.z << '\n';
    out << "POINT_DATA " << grid.num_cells() << '\n';
    // VTK wants x fastest; the grid stores z fastest.
    const auto each = [&](auto&& emit) {
        for (int k = 0; k < grid.nz(); ++k) {
            for (int j = 0; j < grid.ny(); ++j) {
                for (int i = 0; i < grid.nx(); ++i) emit(records[grid.linear(i, j, k)]);
            }
        }
    };
    out << "VECTORS mean_velocity double\n";
    each([&](const CellRecord& r) { out << r.mean.x << ' ' << r.mean.y << ' ' << r.mean.z << '\n'; });
    out << "TENSORS reynolds_stress double\n";
    each([&](const CellRecord& r) {
        const SymTensor& m = r.moments;
        out << m.xx << ' ' << m.xy << ' ' << m.xz << '\n'
            << m.xy << ' ' << m.yy << ' ' << m.yz << '\n'
            << m.xz << ' ' << m.yz << ' ' << m.zz << "\n\n";
    });
    out << "SCALARS tke double 1\nLOOKUP_TABLE default\n";
    each([&](const CellRecord& r) { out << r.tke << '\n'; });
    out << "SCALARS dissipation double 1\nLOOKUP_TABLE default\n";
    each([&](const CellRecord& r) { out << r.dissipation << '\n'; });
}

void write_fields(const CartesianGrid& grid, std::span<const CellRecord> records, const std::filesystem::path& stem) {
    const auto write = [&](const std::filesystem::path& path, auto&& body) {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        body(out);
        if (!out) throw IoError("write failed: " + path.string());
    };
    std::filesystem::path csv = stem;
    csv += ".csv";
    std::filesystem::path vtk = stem;
    vtk += ".vtk";
    write(csv, [&](std::ostream& o) { write_fields_csv(grid, records, o); });
    write(vtk, [&](std::ostream& o) { write_fields_vtk(grid, records, o); });
}

std::vector<FieldRow> read_fields_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,z,u,v,w", 0) != 0) throw IoError("not a field CSV");
    std::vector<FieldRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream s(line);
        double v[14];
        for (int c = 0; c < 14; ++c) {
            std::string tok;
            if (!std::getline(s, tok, ',')) throw IoError("short field CSV row");
            v[c] = std::stod(tok);
        }
        FieldRow r;
        r.position = {v[0], v[1], v[2]};
        r.record.mean = {v[3], v[4], v[5]};
        r.record.moments = {v[6], v[7], v[8], v[9], v[10], v[11]};
        r.record.tke = v[12];
        r.record.dissipation = v[13];
        rows.push_back(r);
    }
    return rows;
}

}  // namespace sdm

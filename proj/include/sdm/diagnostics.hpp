#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdm/domain.hpp"

namespace sdm {

/// Normalised histogram of the streamwise velocity near a probe point.
struct VelocityHistogram {
    std::vector<double> edges;      ///< bins.size() + 1 edges, m/s
    std::vector<double> frequency;  ///< sums to one
    std::size_t samples = 0;
    Vec3 probe;
    std::array<int, 3> half_extent{0, 0, 0};  ///< neighbourhood in cells around the probe cell

    /// Centre of the most populated bin (the first one on ties).
    double mode() const;
};

/// Histogram of u over the cells within `half_extent` of the probe's cell.
/// Throws EstimatorError if the neighbourhood holds no particles.
VelocityHistogram velocity_histogram(std::span<const Particle> particles, const CartesianGrid& grid,
                                     const Vec3& probe, double bin_width, std::array<int, 3> half_extent = {1, 1, 1});

void write_histogram_csv(const VelocityHistogram& h, std::ostream& out);

/// I = sqrt(2k/3) / U_hub. Throws ConfigError unless U_hub > 0.
double turbulence_intensity(double k, double hub_speed);
std::vector<double> turbulence_intensity(std::span<const double> k, double hub_speed);

struct ProfilePoint {
    double z = 0.0;
    double u = 0.0;
    double intensity = 0.0;
    double minus_uw = 0.0;
};

struct StationProfile {
    double diameters = 0.0;  ///< station label, x offset from the hub in rotor diameters
    double x = 0.0;
    std::vector<ProfilePoint> points;
};

struct ProfileSet {
    std::vector<StationProfile> stations;
    std::vector<double> skipped;  ///< labels of stations outside the domain
};

/// Vertical profiles of <u>, I and -<u'w'> in the column through (hub.x + s D, hub.y).
ProfileSet extract_profiles(const CartesianGrid& grid, std::span<const CellRecord> records, const Vec3& hub,
                            double diameter, std::span<const double> stations, double hub_speed);

void write_profiles_csv(const ProfileSet& profiles, std::ostream& out);

/// Cell-centred fields as CSV: x,y,z,u,v,w,uu,vv,ww,uv,uw,vw,k,eps with nine
/// significant digits. `y_slice` restricts the output to one j plane.
void write_fields_csv(const CartesianGrid& grid, std::span<const CellRecord> records, std::ostream& out,
                      std::optional<int> y_slice = std::nullopt);

/// Same data as a legacy ASCII structured-points file.
void write_fields_vtk(const CartesianGrid& grid, std::span<const CellRecord> records, std::ostream& out);

/// Writes `<stem>.csv` and `<stem>.vtk`; throws IoError naming the path.
void write_fields(const CartesianGrid& grid, std::span<const CellRecord> records, const std::filesystem::path& stem);

struct FieldRow {
    Vec3 position;
    CellRecord record;
};

/// Reads back a field CSV written by write_fields_csv.
std::vector<FieldRow> read_fields_csv(std::istream& in);

}  // namespace sdm

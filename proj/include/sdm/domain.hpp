#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace sdm {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double& operator[](int a) { return a == 0 ? x : (a == 1 ? y : z); }
    constexpr double operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline bool is_finite(const Vec3& a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

/// One fluid particle: the Monte Carlo unit carried by the solver.
///
/// `id` is stable for the lifetime of a run; random streams are keyed by it so
/// that results do not depend on the array order or on the worker count.
struct Particle {
    Vec3 position;
    Vec3 velocity;
    std::uint64_t id = 0;
};

/// Symmetric 3x3 tensor stored as its six independent entries.
struct SymTensor {
    double xx = 0.0, yy = 0.0, zz = 0.0, xy = 0.0, xz = 0.0, yz = 0.0;

    double operator()(int i, int j) const;
    double trace() const { return xx + yy + zz; }

    SymTensor& operator+=(const SymTensor& o) {
        xx += o.xx; yy += o.yy; zz += o.zz; xy += o.xy; xz += o.xz; yz += o.yz;
        return *this;
    }
    SymTensor& operator*=(double s) {
        xx *= s; yy *= s; zz *= s; xy *= s; xz *= s; yz *= s;
        return *this;
    }
    friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
    friend SymTensor operator*(SymTensor a, double s) { return a *= s; }
    friend bool operator==(const SymTensor&, const SymTensor&) = default;
};

/// General 3x3 tensor, row-major.
using Tensor3 = std::array<std::array<double, 3>, 3>;

/// Axis-aligned closed box [lo, hi].
struct Box {
    Vec3 lo;
    Vec3 hi;

    Vec3 size() const { return hi - lo; }
    bool contains(const Vec3& p) const;
    /// Strict interior: lo < p < hi on every axis.
    bool contains_strict(const Vec3& p) const;
};

struct CellIndex {
    int i = 0;
    int j = 0;
    int k = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Eulerian statistics attached to one partitioning cell.
struct CellRecord {
    Vec3 mean;            ///< <U>, m/s
    SymTensor moments;    ///< <u'_i u'_j>, m^2/s^2
    double tke = 0.0;     ///< k = trace/2, m^2/s^2
    double dissipation = 0.0;  ///< epsilon, m^2/s^3
};

/// Regular Cartesian partition of the domain with per-cell Eulerian records.
///
/// Cells are half-open [low, high) along every axis; the linear index is
/// (i * ny + j) * nz + k, which is also the order the transport step leaves
/// the particle array in.
class CartesianGrid {
public:
    CartesianGrid() = default;
    CartesianGrid(std::array<int, 3> counts, Vec3 spacing, Vec3 origin = {});

    int nx() const { return counts_[0]; }
    int ny() const { return counts_[1]; }
    int nz() const { return counts_[2]; }
    int count(int axis) const { return counts_[static_cast<std::size_t>(axis)]; }
    std::size_t num_cells() const { return cells_.size(); }
    const Vec3& spacing() const { return spacing_; }
    const Vec3& origin() const { return origin_; }
    double min_spacing() const;
    double cell_volume() const { return spacing_.x * spacing_.y * spacing_.z; }
    Box box() const;

    std::size_t linear(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * static_cast<std::size_t>(counts_[1]) +
                static_cast<std::size_t>(j)) *
                   static_cast<std::size_t>(counts_[2]) +
               static_cast<std::size_t>(k);
    }
    std::size_t linear(const CellIndex& c) const { return linear(c.i, c.j, c.k); }
    CellIndex unravel(std::size_t cell) const;

    /// Unique cell containing `position`; throws DomainError outside the box.
    CellIndex cell_index(const Vec3& position) const;
    Vec3 cell_center(const CellIndex& c) const;
    Vec3 cell_center(std::size_t cell) const { return cell_center(unravel(cell)); }

    CellRecord& cell(std::size_t c) { return cells_[c]; }
    const CellRecord& cell(std::size_t c) const { return cells_[c]; }
    CellRecord& cell(int i, int j, int k) { return cells_[linear(i, j, k)]; }
    const CellRecord& cell(int i, int j, int k) const { return cells_[linear(i, j, k)]; }
    std::vector<CellRecord>& cells() { return cells_; }
    const std::vector<CellRecord>& cells() const { return cells_; }

private:
    std::array<int, 3> counts_{0, 0, 0};
    Vec3 spacing_;
    Vec3 origin_;
    std::vector<CellRecord> cells_;
};

/// Turbulence closure constants. Density is constant throughout.
struct ModelConstants {
    double rotta = 1.8;      ///< C_R
    double c2 = 0.6;         ///< C_2
    double c_eps = 0.08;     ///< C_epsilon
    double kappa = 0.4;      ///< von Karman constant
    double z0 = 0.03;        ///< roughness length, m
    double z_lm = 150.0;     ///< mixing-length knee height, m
    double rho = 1.225;      ///< air density, kg/m^3

    void validate() const;
};

/// Lift/drag data of a blade section, either tabulated or closed form.
class AirfoilPolar {
public:
    struct Analytic {
        double lift_slope = 2.0 * 3.14159265358979323846;  ///< dC_L/dalpha, 1/rad
        double zero_lift_alpha = 0.0;                       ///< rad
        double cl_max = std::numeric_limits<double>::infinity();
        double cd0 = 0.0;
        double cd2 = 0.0;           ///< C_D = cd0 + cd2 (alpha - alpha_cd)^2
        double alpha_cd = 0.0;      ///< rad
        double alpha_min = -3.14159265358979323846;
        double alpha_max = 3.14159265358979323846;
    };

    AirfoilPolar() = default;

    /// Tabulated polar; alpha in radians, strictly increasing, C_D >= 0.
    static AirfoilPolar tabulated(std::vector<double> alpha, std::vector<double> cl,
                                  std::vector<double> cd);
    static AirfoilPolar analytic(const Analytic& params);

    bool is_tabulated() const { return tabulated_; }
    bool empty() const { return tabulated_ && alpha_.empty(); }
    double alpha_min() const;
    double alpha_max() const;
    const std::vector<double>& alpha() const { return alpha_; }
    const std::vector<double>& cl() const { return cl_; }
    const std::vector<double>& cd() const { return cd_; }
    const Analytic& analytic_params() const { return analytic_; }

private:
    bool tabulated_ = true;
    std::vector<double> alpha_, cl_, cd_;
    Analytic analytic_;
};

/// Radial blade stations: chord c(r) and local pitch gamma(r).
struct BladeGeometry {
    std::vector<double> radius;  ///< m, strictly increasing
    std::vector<double> chord;   ///< m
    std::vector<double> pitch;   ///< rad

    struct Section {
        double chord = 0.0;
        double pitch = 0.0;
        bool clamped = false;  ///< query radius outside the station range
    };
    /// Linear interpolation between stations, clamped to the end stations.
    Section at(double r) const;
    void validate() const;
};

enum class TurbineModel { NonRotating, Rotating };

/// Options for the disc speed U_D used by the non-rotating model.
enum class DiscSpeedMode {
    ParticleSpeed,  ///< |u| of the particle itself
    CellMean,       ///< |<u>| of the particle's cell
    DiscAverage,    ///< |E[u | X in C_blades]| (default)
};

/// Actuator-disc turbine with its axis along +x.
struct TurbineConfig {
    Vec3 hub;
    double radius = 0.0;          ///< R, m
    double nacelle_radius = 0.0;  ///< m
    double thickness = 0.0;       ///< axial depth of the force cylinder, m
    double omega = 0.0;           ///< rad/s
    int blades = 3;
    double a_nacelle = 0.0;
    double induction = 0.0;       ///< axial induction a of the non-rotating disc
    TurbineModel model = TurbineModel::Rotating;
    DiscSpeedMode disc_speed = DiscSpeedMode::DiscAverage;
    BladeGeometry blade;
    AirfoilPolar polar;

    double disc_area() const;
    double nacelle_area() const;
    void validate() const;
};

enum class TurbineRegion { Outside, Blades, Nacelle };

/// Local cylindrical frame at a point relative to a turbine hub.
struct CylindricalFrame {
    Vec3 axial{1.0, 0.0, 0.0};
    double radius = 0.0;
    Vec3 tangential;
};

/// Position relative to the hub split into axial offset and rotor-plane radius.
struct DiscCoordinates {
    double axial_offset = 0.0;
    double radius = 0.0;
};
DiscCoordinates disc_coordinates(const Vec3& position, const TurbineConfig& turbine);

TurbineRegion classify_turbine_region(const Vec3& position, const TurbineConfig& turbine);

/// Cylindrical frame at `position`; throws DomainError on the turbine axis.
///
/// e_theta = e_x cross e_r, so a blade turning with velocity -omega r e_theta
/// rotates clockwise when seen from upstream.
CylindricalFrame local_frame(const Vec3& position, const TurbineConfig& turbine);

}  // namespace sdm

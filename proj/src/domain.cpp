#include "sdm/domain.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "sdm/errors.hpp"

namespace sdm {

double SymTensor::operator()(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (i == j) return i == 0 ? xx : (i == 1 ? yy : zz);
    if (i == 0) return j == 1 ? xy : xz;
    return yz;
}

bool Box::contains(const Vec3& p) const {
    for (int a = 0; a < 3; ++a) {
        if (!(p[a] >= lo[a] && p[a] <= hi[a])) return false;
    }
    return true;
}

bool Box::contains_strict(const Vec3& p) const {
    for (int a = 0; a < 3; ++a) {
        if (!(p[a] > lo[a] && p[a] < hi[a])) return false;
    }
    return true;
}

CartesianGrid::CartesianGrid(std::array<int, 3> counts, Vec3 spacing, Vec3 origin)
    : counts_(counts), spacing_(spacing), origin_(origin) {
    for (int a = 0; a < 3; ++a) {
        if (counts_[static_cast<std::size_t>(a)] <= 0 || !(spacing_[a] > 0.0)) {
            throw ConfigError("grid needs positive cell counts and spacings");
        }
    }
    cells_.resize(static_cast<std::size_t>(counts_[0]) * static_cast<std::size_t>(counts_[1]) *
                  static_cast<std::size_t>(counts_[2]));
}

double CartesianGrid::min_spacing() const {
    return std::min({spacing_.x, spacing_.y, spacing_.z});
}

Box CartesianGrid::box() const {
    Vec3 hi = origin_;
    for (int a = 0; a < 3; ++a) hi[a] += counts_[static_cast<std::size_t>(a)] * spacing_[a];
    return {origin_, hi};
}

CellIndex CartesianGrid::unravel(std::size_t cell) const {
    const auto nz = static_cast<std::size_t>(counts_[2]);
    const auto ny = static_cast<std::size_t>(counts_[1]);
    CellIndex c;
    c.k = static_cast<int>(cell % nz);
    cell /= nz;
    c.j = static_cast<int>(cell % ny);
    c.i = static_cast<int>(cell / ny);
    return c;
}

CellIndex CartesianGrid::cell_index(const Vec3& position) const {
    std::array<int, 3> idx{};
    for (int a = 0; a < 3; ++a) {
        const int n = counts_[static_cast<std::size_t>(a)];
        const double rel = (position[a] - origin_[a]) / spacing_[a];
        if (!(rel >= 0.0) || !(position[a] < origin_[a] + n * spacing_[a])) {
            std::ostringstream msg;
            msg << "position (" << position.x << ", " << position.y << ", " << position.z
                << ") outside the grid on axis " << a;
            throw DomainError(msg.str());
        }
        // rel can round up to n for points a few ulps below the upper face.
        idx[static_cast<std::size_t>(a)] = std::min(static_cast<int>(rel), n - 1);
    }
    return {idx[0], idx[1], idx[2]};
}

Vec3 CartesianGrid::cell_center(const CellIndex& c) const {
    return {origin_.x + (c.i + 0.5) * spacing_.x, origin_.y + (c.j + 0.5) * spacing_.y,
            origin_.z + (c.k + 0.5) * spacing_.z};
}

void ModelConstants::validate() const {
    if (!(rotta > 0 && c2 > 0 && c_eps > 0 && kappa > 0 && z0 > 0 && z_lm > 0 && rho > 0)) {
        throw ConfigError("model constants must be strictly positive");
    }
    if (!(kappa < 1.0)) throw ConfigError("von Karman constant must lie in (0, 1)");
}

AirfoilPolar AirfoilPolar::tabulated(std::vector<double> alpha, std::vector<double> cl,
                                     std::vector<double> cd) {
    if (alpha.empty()) throw ConfigError("empty airfoil polar");
    if (alpha.size() != cl.size() || alpha.size() != cd.size()) {
        throw ConfigError("airfoil polar columns differ in length");
    }
    for (std::size_t i = 1; i < alpha.size(); ++i) {
        if (!(alpha[i] > alpha[i - 1])) throw ConfigError("polar alpha must be strictly increasing");
    }
    for (double d : cd) {
        if (d < 0.0) throw ConfigError("polar drag coefficient must be non-negative");
    }
    AirfoilPolar p;
    p.tabulated_ = true;
    p.alpha_ = std::move(alpha);
    p.cl_ = std::move(cl);
    p.cd_ = std::move(cd);
    return p;
}

AirfoilPolar AirfoilPolar::analytic(const Analytic& params) {
    if (!(params.alpha_max > params.alpha_min)) throw ConfigError("analytic polar alpha range empty");
    if (params.cd0 < 0.0 || params.cd2 < 0.0) throw ConfigError("analytic polar drag must be non-negative");
    AirfoilPolar p;
    p.tabulated_ = false;
    p.analytic_ = params;
    return p;
}

double AirfoilPolar::alpha_min() const {
    if (!tabulated_) return analytic_.alpha_min;
    if (alpha_.empty()) throw ConfigError("empty airfoil polar");
    return alpha_.front();
}

double AirfoilPolar::alpha_max() const {
    if (!tabulated_) return analytic_.alpha_max;
    if (alpha_.empty()) throw ConfigError("empty airfoil polar");
    return alpha_.back();
}

BladeGeometry::Section BladeGeometry::at(double r) const {
    if (radius.empty()) throw ConfigError("blade geometry has no stations");
    if (r <= radius.front()) return {chord.front(), pitch.front(), r < radius.front()};
    if (r >= radius.back()) return {chord.back(), pitch.back(), r > radius.back()};
    const auto it = std::upper_bound(radius.begin(), radius.end(), r);
    const auto hi = static_cast<std::size_t>(it - radius.begin());
    const std::size_t lo = hi - 1;
    const double w = (r - radius[lo]) / (radius[hi] - radius[lo]);
    return {chord[lo] + w * (chord[hi] - chord[lo]), pitch[lo] + w * (pitch[hi] - pitch[lo]), false};
}

void BladeGeometry::validate() const {
    if (radius.empty() || radius.size() != chord.size() || radius.size() != pitch.size()) {
        throw ConfigError("blade geometry columns missing or of different length");
    }
    for (std::size_t i = 0; i < radius.size(); ++i) {
        if (i > 0 && !(radius[i] > radius[i - 1])) {
            throw ConfigError("blade station radii must be strictly increasing");
        }
        if (!(chord[i] > 0.0)) throw ConfigError("blade chord must be positive");
    }
}

double TurbineConfig::disc_area() const { return std::numbers::pi * radius * radius; }

double TurbineConfig::nacelle_area() const {
    return std::numbers::pi * nacelle_radius * nacelle_radius;
}

void TurbineConfig::validate() const {
    if (!(nacelle_radius > 0.0 && nacelle_radius < radius)) {
        throw ConfigError("turbine needs 0 < nacelle radius < rotor radius");
    }
    if (!(thickness > 0.0)) throw ConfigError("actuator disc thickness must be positive");
    if (blades <= 0) throw ConfigError("turbine needs at least one blade");
    if (!(a_nacelle >= 0.0 && a_nacelle < 1.0)) throw ConfigError("nacelle induction must lie in [0, 1)");
    if (model == TurbineModel::NonRotating) {
        if (!(induction >= 0.0 && induction < 1.0)) throw ConfigError("disc induction must lie in [0, 1)");
    } else {
        blade.validate();
        if (polar.empty()) throw ConfigError("rotating disc needs an airfoil polar");
    }
}

DiscCoordinates disc_coordinates(const Vec3& position, const TurbineConfig& turbine) {
    const Vec3 d = position - turbine.hub;
    return {d.x, std::hypot(d.y, d.z)};
}

TurbineRegion classify_turbine_region(const Vec3& position, const TurbineConfig& turbine) {
    const DiscCoordinates dc = disc_coordinates(position, turbine);
    if (std::abs(dc.axial_offset) > 0.5 * turbine.thickness) return TurbineRegion::Outside;
    if (dc.radius <= turbine.nacelle_radius) return TurbineRegion::Nacelle;
    if (dc.radius <= turbine.radius) return TurbineRegion::Blades;
    return TurbineRegion::Outside;
}

CylindricalFrame local_frame(const Vec3& position, const TurbineConfig& turbine) {
    const Vec3 d = position - turbine.hub;
    const double r = std::hypot(d.y, d.z);
    if (!(r > 0.0)) throw DomainError("cylindrical frame is undefined on the turbine axis");
    const Vec3 radial{0.0, d.y / r, d.z / r};
    CylindricalFrame f;
    f.radius = r;
    f.tangential = cross(f.axial, radial);
    return f;
}

}  // namespace sdm

#include "sdm/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "sdm/parallel.hpp"

namespace sdm {
namespace {

Eigen::Matrix3d to_matrix(const SymTensor& m) {
    Eigen::Matrix3d a;
    a << m.xx, m.xy, m.xz, m.xy, m.yy, m.yz, m.xz, m.yz, m.zz;
    return a;
}

SymTensor from_matrix(const Eigen::Matrix3d& a) {
    return {a(0, 0), a(1, 1), a(2, 2), 0.5 * (a(0, 1) + a(1, 0)), 0.5 * (a(0, 2) + a(2, 0)),
            0.5 * (a(1, 2) + a(2, 1))};
}

void add_outer(SymTensor& acc, const Vec3& d, double w) {
    acc.xx += w * d.x * d.x;
    acc.yy += w * d.y * d.y;
    acc.zz += w * d.z * d.z;
    acc.xy += w * d.x * d.y;
    acc.xz += w * d.x * d.z;
    acc.yz += w * d.y * d.z;
}

void fill_record(std::span<const Particle> ps, CellRecord& rec) {
    const MomentStats s = second_moments(ps);
    rec.mean = s.mean;
    rec.moments = s.moments;
    rec.tke = s.tke;
}

}  // namespace

Vec3 mean_velocity(std::span<const Particle> cell_particles) {
    if (cell_particles.empty()) throw EstimatorError("mean of an empty cell");
    Vec3 sum;
    for (const Particle& p : cell_particles) sum += p.velocity;
    const double n = static_cast<double>(cell_particles.size());
    return {sum.x / n, sum.y / n, sum.z / n};
}

MomentStats second_moments(std::span<const Particle> cell_particles) {
    if (cell_particles.size() < 2) {
        throw EstimatorError("second moments need at least two particles in the cell");
    }
    MomentStats s;
    s.mean = mean_velocity(cell_particles);
    for (const Particle& p : cell_particles) add_outer(s.moments, p.velocity - s.mean, 1.0);
    s.moments = s.moments * (1.0 / static_cast<double>(cell_particles.size()));
    s.tke = 0.5 * s.moments.trace();
    return s;
}

SymTensor clip_psd(const SymTensor& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(to_matrix(m));
    const Eigen::Vector3d lambda = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::Matrix3d& v = eig.eigenvectors();
    return from_matrix(v * lambda.asDiagonal() * v.transpose());
}

Tensor3 psd_factor(const SymTensor& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(to_matrix(m));
    const Eigen::Vector3d root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::Matrix3d& v = eig.eigenvectors();
    const Eigen::Matrix3d l = v * root.asDiagonal() * v.transpose();
    Tensor3 out{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = l(i, j);
    }
    return out;
}

double disc_mean_speed(std::span<const Particle> particles, const TurbineConfig& turbine) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const Particle& p : particles) {
        if (classify_turbine_region(p.position, turbine) == TurbineRegion::Blades) {
            sum += p.velocity.x;
            ++n;
        }
    }
    if (n == 0) throw EstimatorError("no particle inside the blade region");
    return std::abs(sum / static_cast<double>(n));
}

void estimate_cell_statistics(std::span<const Particle> particles, CartesianGrid& grid,
                              std::size_t min_per_cell) {
    const std::size_t nc = grid.num_cells();
    std::vector<std::size_t> cell_of(particles.size());
    std::vector<std::size_t> count(nc, 0);
    for (std::size_t p = 0; p < particles.size(); ++p) {
        cell_of[p] = grid.linear(grid.cell_index(particles[p].position));
        ++count[cell_of[p]];
    }
    // Stable counting sort so each cell sees its particles in array order.
    std::vector<std::size_t> start(nc + 1, 0);
    for (std::size_t c = 0; c < nc; ++c) start[c + 1] = start[c] + count[c];
    std::vector<Particle> grouped(particles.size());
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t p = 0; p < particles.size(); ++p) grouped[fill[cell_of[p]]++] = particles[p];

    for (std::size_t c = 0; c < nc; ++c) {
        if (count[c] < min_per_cell) {
            throw EstimatorError("cell " + std::to_string(c) + " holds " + std::to_string(count[c]) +
                                 " particles, fewer than required");
        }
        CellRecord& rec = grid.cell(c);
        const std::span<const Particle> cell(grouped.data() + start[c], count[c]);
        if (count[c] >= 2) {
            fill_record(cell, rec);
        } else {
            rec.mean = count[c] ? mean_velocity(cell) : Vec3{};
            rec.moments = {};
            rec.tke = 0.0;
        }
    }
}

void estimate_sorted_cell_statistics(std::span<const Particle> particles, CartesianGrid& grid,
                                     std::size_t per_cell, int threads) {
    const std::size_t nc = grid.num_cells();
    if (particles.size() != nc * per_cell) {
        throw EstimatorError("sorted layout needs exactly per_cell particles in every cell");
    }
    parallel_for(nc, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            fill_record(particles.subspan(c * per_cell, per_cell), grid.cell(c));
        }
    });
}

std::array<CicWeight, 8> cic_weights(const Vec3& position, const CartesianGrid& grid) {
    std::array<int, 3> lo{};
    std::array<double, 3> frac{};
    for (int a = 0; a < 3; ++a) {
        const int n = grid.count(a);
        const double s = (position[a] - grid.origin()[a]) / grid.spacing()[a] - 0.5;
        int i0 = static_cast<int>(std::floor(s));
        double f = s - i0;
        if (i0 < 0) {
            i0 = 0;
            f = 0.0;
        } else if (i0 >= n - 1) {
            i0 = n - 1;
            f = 0.0;
        }
        lo[static_cast<std::size_t>(a)] = i0;
        frac[static_cast<std::size_t>(a)] = f;
    }
    std::array<CicWeight, 8> out{};
    for (int corner = 0; corner < 8; ++corner) {
        int idx[3];
        double w = 1.0;
        for (int a = 0; a < 3; ++a) {
            const int bit = (corner >> a) & 1;
            const auto ua = static_cast<std::size_t>(a);
            idx[a] = std::min(lo[ua] + bit, grid.count(a) - 1);
            w *= bit ? frac[ua] : 1.0 - frac[ua];
        }
        out[static_cast<std::size_t>(corner)] = {grid.linear(idx[0], idx[1], idx[2]), w};
    }
    return out;
}

CicDeposit::CicDeposit(const CartesianGrid& grid)
    : grid_(&grid),
      weight_(grid.num_cells(), 0.0),
      first_(grid.num_cells()),
      second_(grid.num_cells()) {}

void CicDeposit::add(std::span<const Particle> particles) {
    for (const Particle& p : particles) {
        for (const CicWeight& cw : cic_weights(p.position, *grid_)) {
            if (cw.weight == 0.0) continue;
            weight_[cw.cell] += cw.weight;
            first_[cw.cell] += p.velocity * cw.weight;
            add_outer(second_[cw.cell], p.velocity, cw.weight);
        }
    }
    ++samples_;
}

std::vector<CellRecord> CicDeposit::finalize() const {
    std::vector<CellRecord> out(weight_.size());
    for (std::size_t c = 0; c < weight_.size(); ++c) {
        if (!(weight_[c] > 0.0)) continue;
        const double inv = 1.0 / weight_[c];
        CellRecord& r = out[c];
        r.mean = first_[c] * inv;
        SymTensor m = second_[c] * inv;
        m.xx -= r.mean.x * r.mean.x;
        m.yy -= r.mean.y * r.mean.y;
        m.zz -= r.mean.z * r.mean.z;
        m.xy -= r.mean.x * r.mean.y;
        m.xz -= r.mean.x * r.mean.z;
        m.yz -= r.mean.y * r.mean.z;
        r.moments = m;
        r.tke = 0.5 * std::max(0.0, m.trace());
    }
    return out;
}

std::vector<CellRecord> cic_deposit(std::span<const Particle> particles, const CartesianGrid& grid) {
    CicDeposit dep(grid);
    dep.add(particles);
    return dep.finalize();
}

EmpiricalProfile::EmpiricalProfile(std::vector<Level> levels) : levels_(std::move(levels)) {
    for (std::size_t i = 1; i < levels_.size(); ++i) {
        if (!(levels_[i].z > levels_[i - 1].z)) {
            throw ConfigError("profile levels must have strictly increasing heights");
        }
    }
}

EmpiricalProfile::Level EmpiricalProfile::at(double z) const {
    if (levels_.empty()) throw EstimatorError("empty empirical profile");
    if (z <= levels_.front().z) return levels_.front();
    if (z >= levels_.back().z) return levels_.back();
    const auto it = std::upper_bound(levels_.begin(), levels_.end(), z,
                                     [](double v, const Level& l) { return v < l.z; });
    const Level& b = *it;
    const Level& a = *(it - 1);
    const double w = (z - a.z) / (b.z - a.z);
    auto mix = [w](double x, double y) { return x + w * (y - x); };
    Level out;
    out.z = z;
    out.mean = a.mean + (b.mean - a.mean) * w;
    out.moments = {mix(a.moments.xx, b.moments.xx), mix(a.moments.yy, b.moments.yy),
                   mix(a.moments.zz, b.moments.zz), mix(a.moments.xy, b.moments.xy),
                   mix(a.moments.xz, b.moments.xz), mix(a.moments.yz, b.moments.yz)};
    return out;
}

void EmpiricalProfile::write_csv(std::ostream& out) const {
    out << "z,u,v,w,uu,vv,ww,uv,uw,vw\n";
    out << std::setprecision(9);
    for (const Level& l : levels_) {
        out << l.z << ',' << l.mean.x << ',' << l.mean.y << ',' << l.mean.z << ',' << l.moments.xx << ','
            << l.moments.yy << ',' << l.moments.zz << ',' << l.moments.xy << ',' << l.moments.xz << ','
            << l.moments.yz << '\n';
    }
}

void EmpiricalProfile::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open profile file for writing: " + path);
    write_csv(out);
    if (!out) throw IoError("failed writing profile file: " + path);
}

EmpiricalProfile EmpiricalProfile::read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("profile CSV is empty");
    std::vector<Level> levels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        Level l;
        row >> l.z >> l.mean.x >> l.mean.y >> l.mean.z >> l.moments.xx >> l.moments.yy >> l.moments.zz >>
            l.moments.xy >> l.moments.xz >> l.moments.yz;
        if (!row) throw IoError("malformed profile CSV row: " + line);
        levels.push_back(l);
    }
    return EmpiricalProfile(std::move(levels));
}

EmpiricalProfile EmpiricalProfile::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile file: " + path);
    return read_csv(in);
}

EmpiricalProfile column_profiles(const CartesianGrid& grid) {
    std::vector<EmpiricalProfile::Level> levels(static_cast<std::size_t>(grid.nz()));
    const double n = static_cast<double>(grid.nx()) * grid.ny();
    for (int k = 0; k < grid.nz(); ++k) {
        auto& lvl = levels[static_cast<std::size_t>(k)];
        lvl.z = grid.origin().z + (k + 0.5) * grid.spacing().z;
        Vec3 mean;
        SymTensor within;
        for (int i = 0; i < grid.nx(); ++i) {
            for (int j = 0; j < grid.ny(); ++j) {
                const CellRecord& c = grid.cell(i, j, k);
                mean += c.mean;
                within += c.moments;
            }
        }
        mean *= 1.0 / n;
        SymTensor between;
        for (int i = 0; i < grid.nx(); ++i) {
            for (int j = 0; j < grid.ny(); ++j) add_outer(between, grid.cell(i, j, k).mean - mean, 1.0);
        }
        lvl.mean = mean;
        lvl.moments = clip_psd((within + between) * (1.0 / n));
    }
    return EmpiricalProfile(std::move(levels));
}

}  // namespace sdm

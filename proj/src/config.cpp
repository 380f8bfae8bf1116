#include "sdm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sdm/errors.hpp"

namespace sdm {

namespace pt = boost::property_tree;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<double> numbers(const std::string& text) {
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("not a number: '" + tok + "'");
        }
    }
    return out;
}

class Section {
public:
    Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

    std::string text(const std::string& key, const std::string& fallback) const {
        return has(key) ? tree_->find(key)->second.data() : fallback;
    }
    std::string text(const std::string& key) const {
        if (!has(key)) throw ConfigError("missing key '" + key + "' in [" + name_ + "]");
        return text(key, "");
    }
    double real(const std::string& key, double fallback) const { return has(key) ? real(key) : fallback; }
    double real(const std::string& key) const {
        const auto v = numbers(text(key));
        if (v.size() != 1) throw ConfigError("key '" + key + "' in [" + name_ + "] expects one number");
        return v.front();
    }
    long integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }
    long integer(const std::string& key) const {
        const double v = real(key);
        if (v != std::floor(v)) throw ConfigError("key '" + key + "' in [" + name_ + "] expects an integer");
        return static_cast<long>(v);
    }
    Vec3 vec(const std::string& key, const Vec3& fallback) const { return has(key) ? vec(key) : fallback; }
    Vec3 vec(const std::string& key) const {
        const auto v = numbers(text(key));
        if (v.size() != 3) throw ConfigError("key '" + key + "' in [" + name_ + "] expects three numbers");
        return {v[0], v[1], v[2]};
    }
    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = text(key);
        if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
        if (v == "false" || v == "no" || v == "off" || v == "0") return false;
        throw ConfigError("key '" + key + "' in [" + name_ + "] expects true or false");
    }

private:
    const pt::ptree* tree_;
    std::string name_;
};

Section section(const pt::ptree& root, const std::string& name) {
    const auto it = root.find(name);
    return {it == root.not_found() ? nullptr : &it->second, name};
}

std::vector<std::vector<double>> read_table(const std::filesystem::path& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        try {
            row = numbers(line);
        } catch (const ConfigError& e) {
            if (first) {
                first = false;
                continue;  // header row
            }
            throw IoError(path.string() + ": " + e.what());
        }
        first = false;
        if (row.size() != columns) throw IoError(path.string() + ": expected " + std::to_string(columns) + " columns");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path.string() + ": no data rows");
    return rows;
}

TurbineConfig parse_turbine(const Section& s, const std::filesystem::path& base, double default_thickness) {
    TurbineConfig t;
    const std::string model = s.text("model", "rotating");
    if (model == "rotating" || model == "r-adm") {
        t.model = TurbineModel::Rotating;
    } else if (model == "non-rotating" || model == "nr-adm") {
        t.model = TurbineModel::NonRotating;
    } else {
        throw ConfigError("unknown turbine model '" + model + "'");
    }
    t.hub = s.vec("hub");
    t.radius = s.real("radius");
    t.nacelle_radius = s.real("nacelle_radius");
    t.thickness = s.real("thickness", default_thickness);
    t.omega = s.real("omega", 0.0);
    t.blades = static_cast<int>(s.integer("blades", 3));
    t.a_nacelle = s.real("a_nacelle", 0.0);
    t.induction = s.real("induction", 0.0);
    const std::string speed = s.text("disc_speed", "disc-average");
    if (speed == "disc-average") {
        t.disc_speed = DiscSpeedMode::DiscAverage;
    } else if (speed == "cell-mean") {
        t.disc_speed = DiscSpeedMode::CellMean;
    } else if (speed == "particle") {
        t.disc_speed = DiscSpeedMode::ParticleSpeed;
    } else {
        throw ConfigError("unknown disc_speed '" + speed + "'");
    }
    if (s.has("blade_file")) {
        t.blade = read_blade_csv(base / s.text("blade_file"));
        const double offset = s.real("pitch_offset_deg", 0.0) * kDeg;
        for (double& p : t.blade.pitch) p += offset;
    }
    if (s.has("polar_file")) {
        t.polar = read_polar_csv(base / s.text("polar_file"));
    } else if (s.text("polar", "") == "analytic") {
        AirfoilPolar::Analytic a;
        a.lift_slope = s.real("polar_lift_slope", a.lift_slope);
        a.zero_lift_alpha = s.real("polar_zero_lift_deg", 0.0) * kDeg;
        a.cl_max = s.real("polar_cl_max", a.cl_max);
        a.cd0 = s.real("polar_cd0", 0.0);
        a.cd2 = s.real("polar_cd2", 0.0);
        a.alpha_cd = s.real("polar_alpha_cd_deg", 0.0) * kDeg;
        a.alpha_min = s.real("polar_alpha_min_deg", -180.0) * kDeg;
        a.alpha_max = s.real("polar_alpha_max_deg", 180.0) * kDeg;
        t.polar = AirfoilPolar::analytic(a);
    }
    return t;
}

}  // namespace

Vec3 ScenarioConfig::spacing() const {
    return {size.x / cells[0], size.y / cells[1], size.z / cells[2]};
}

CartesianGrid ScenarioConfig::make_grid() const { return CartesianGrid(cells, spacing(), origin); }

void ScenarioConfig::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (cells[static_cast<std::size_t>(a)] < 1) throw ConfigError("grid needs at least one cell per axis");
        if (!(size[a] > 0.0)) throw ConfigError("domain size must be positive");
    }
    if (per_cell < 2) throw ConfigError("at least two particles per cell are needed");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (steps < 0 || warmup_steps < 0) throw ConfigError("step counts must be non-negative");
    if (!(ustar >= 0.0)) throw ConfigError("friction velocity must be non-negative");
    if (threads < 1) throw ConfigError("thread count must be positive");
    if (average_window < 1) throw ConfigError("averaging window must be at least one step");
    if (!(histogram_bin > 0.0)) throw ConfigError("histogram bin width must be positive");
    constants.validate();
    if (!(0.5 * spacing().z > constants.z0)) {
        throw ConfigError("first cell centre must lie above the roughness length");
    }
    const Box box{origin, origin + size};
    for (const TurbineConfig& t : turbines) {
        t.validate();
        if (!box.contains(t.hub)) throw ConfigError("turbine hub lies outside the domain");
    }
}

ScenarioConfig parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree root;
    try {
        pt::read_ini(in, root);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("scenario syntax: ") + e.what());
    }
    ScenarioConfig c;
    const Section general = section(root, "scenario");
    c.name = general.text("name", c.name);

    const Section domain = section(root, "domain");
    c.origin = domain.vec("origin", {});
    c.size = domain.vec("size");
    const Vec3 cells = domain.vec("cells");
    for (int a = 0; a < 3; ++a) {
        if (cells[a] != std::floor(cells[a])) throw ConfigError("cell counts must be integers");
        c.cells[static_cast<std::size_t>(a)] = static_cast<int>(cells[a]);
    }
    if (domain.has("spacing")) {
        // Optional cross-check against the tabulated cell sizes.
        const Vec3 d = domain.vec("spacing");
        for (int a = 0; a < 3; ++a) {
            if (std::abs(d[a] * c.cells[static_cast<std::size_t>(a)] - c.size[a]) > 1e-9 * c.size[a]) {
                throw ConfigError("cells times spacing does not match the domain size");
            }
        }
    }

    const Section particles = section(root, "particles");
    c.per_cell = static_cast<std::size_t>(particles.integer("per_cell", static_cast<long>(c.per_cell)));
    c.seed = static_cast<std::uint64_t>(particles.integer("seed", 1));

    const Section time = section(root, "time");
    c.dt = time.real("dt");
    c.steps = static_cast<int>(time.integer("steps", 0));
    c.warmup_steps = static_cast<int>(time.integer("warmup_steps", c.steps));

    const Section model = section(root, "model");
    c.constants.rotta = model.real("rotta", c.constants.rotta);
    c.constants.c2 = model.real("c2", c.constants.c2);
    c.constants.c_eps = model.real("c_eps", c.constants.c_eps);
    c.constants.kappa = model.real("kappa", c.constants.kappa);
    c.constants.z0 = model.real("z0", c.constants.z0);
    c.constants.z_lm = model.real("z_lm", c.constants.z_lm);
    c.constants.rho = model.real("rho", c.constants.rho);

    const Section boundary = section(root, "boundary");
    c.ustar = boundary.real("ustar");
    c.top_velocity = boundary.vec("top_velocity");
    c.tke_init_factor = boundary.real("tke_init_factor", c.tke_init_factor);
    c.tke_init_taper = boundary.real("tke_init_taper", c.tke_init_taper);

    const Section numerics = section(root, "numerics");
    c.correct_particles = numerics.flag("correct_particles", c.correct_particles);
    c.keep_level_mean = numerics.flag("keep_level_mean", c.keep_level_mean);
    c.threads = static_cast<int>(numerics.integer("threads", c.threads));

    const Section output = section(root, "output");
    c.field_every = static_cast<int>(output.integer("field_every", c.field_every));
    c.average_window = static_cast<int>(output.integer("average_window", c.average_window));
    c.hub_speed = output.real("hub_speed", c.hub_speed);
    if (output.has("stations")) c.stations = numbers(output.text("stations"));
    c.histogram_bin = output.real("histogram_bin", c.histogram_bin);

    for (const auto& [key, tree] : root) {
        if (key.rfind("turbine", 0) != 0) continue;
        c.turbines.push_back(parse_turbine(Section(&tree, key), base_dir, c.spacing().x));
    }
    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario " + path.string());
    return parse_scenario(in, path.parent_path());
}

BladeGeometry read_blade_csv(const std::filesystem::path& path) {
    BladeGeometry b;
    for (const auto& row : read_table(path, 3)) {
        b.radius.push_back(row[0]);
        b.chord.push_back(row[1]);
        b.pitch.push_back(row[2] * kDeg);
    }
    b.validate();
    return b;
}

AirfoilPolar read_polar_csv(const std::filesystem::path& path) {
    std::vector<double> alpha, cl, cd;
    for (const auto& row : read_table(path, 3)) {
        alpha.push_back(row[0] * kDeg);
        cl.push_back(row[1]);
        cd.push_back(row[2]);
    }
    return AirfoilPolar::tabulated(std::move(alpha), std::move(cl), std::move(cd));
}

}  // namespace sdm

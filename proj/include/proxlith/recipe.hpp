#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxlith/layout.hpp"
#include "proxlith/metrology.hpp"
#include "proxlith/raster.hpp"
#include "proxlith/resist.hpp"
#include "proxlith/wave_optics.hpp"

namespace proxlith {

struct SourceParams {
    double band_lo_um = 0.35;
    double band_hi_um = 0.45;
    int lines = 5;
    double power_mw_per_cm2 = 10.0;

    SourceSpec make() const {
        return SourceSpec::uniform_band(band_lo_um, band_hi_um, lines, power_mw_per_cm2);
    }
};

/// Complete description of one virtual print run.
struct Recipe {
    LayoutParams layout;
    RasterParams raster{0.5, 10.0, 4};
    SourceParams source;
    ResistRecipe resist;
    std::vector<double> gaps_um{120, 240, 360, 480, 600, 720, 840, 960};
    PropagationOptions prop;
    double guard_um = 160.0;  // simulated margin around the region, cropped off
    RegimeThresholds thresholds;
    std::vector<LensRegime> expected_regimes;  // optional, one per gap
};

namespace recipedetail {

struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
};

using RawMap = std::map<std::string, Entry>;

inline void fail_at(int line, const std::string& what) {
    throw std::runtime_error("recipe error at line " + std::to_string(line) + ": " + what);
}

inline RawMap read_raw(std::istream& is) {
    RawMap out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        std::string t = line.substr(b, e - b + 1);
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3) fail_at(lineno, "malformed section header");
            section = t.substr(1, t.size() - 2);
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) fail_at(lineno, "expected 'key = value'");
        auto strip = [](std::string s) {
            auto b2 = s.find_first_not_of(" \t");
            auto e2 = s.find_last_not_of(" \t");
            return b2 == std::string::npos ? std::string{} : s.substr(b2, e2 - b2 + 1);
        };
        std::string key = strip(t.substr(0, eq)), val = strip(t.substr(eq + 1));
        if (section.empty()) fail_at(lineno, "key outside any [section]");
        if (key.empty()) fail_at(lineno, "empty key");
        if (val.empty()) fail_at(lineno, "empty value for '" + key + "'");
        std::string full = section + "." + key;
        if (out.count(full)) fail_at(lineno, "duplicate key '" + full + "'");
        out[full] = {val, lineno, false};
    }
    return out;
}

inline const Entry* find(const RawMap& m, const std::string& key) {
    auto it = m.find(key);
    if (it == m.end()) return nullptr;
    it->second.used = true;
    return &it->second;
}

inline std::vector<std::string> tokens(const Entry& e) {
    std::istringstream ss(e.value);
    std::vector<std::string> out;
    std::string t;
    while (ss >> t) out.push_back(t);
    return out;
}

inline double to_num(const std::string& t, const Entry& e) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &pos);
    } catch (...) {
        fail_at(e.line, "'" + t + "' is not a number");
    }
    if (pos != t.size()) fail_at(e.line, "'" + t + "' is not a number");
    return v;
}

/// numbers followed by one mandatory unit token
inline std::vector<double> with_unit(const Entry& e, std::initializer_list<const char*> units,
                                     std::string* unit_out = nullptr) {
    auto tks = tokens(e);
    if (tks.size() < 2) fail_at(e.line, "expected '<value...> <unit>'");
    const std::string unit = tks.back();
    if (std::find_if(units.begin(), units.end(),
                     [&](const char* u) { return unit == u; }) == units.end()) {
        std::string want;
        for (const char* u : units) want += std::string(want.empty() ? "" : " or ") + u;
        fail_at(e.line, "unit '" + unit + "' not allowed, expected " + want);
    }
    if (unit_out) *unit_out = unit;
    std::vector<double> vals;
    for (std::size_t i = 0; i + 1 < tks.size(); ++i) vals.push_back(to_num(tks[i], e));
    return vals;
}

inline double length_um(const Entry& e) {
    std::string u;
    auto v = with_unit(e, {"um", "nm"}, &u);
    if (v.size() != 1) fail_at(e.line, "expected a single length");
    return u == "nm" ? v[0] / 1000.0 : v[0];
}

inline double one_value(const Entry& e, const char* unit) {
    auto v = with_unit(e, {unit});
    if (v.size() != 1) fail_at(e.line, std::string("expected a single value in ") + unit);
    return v[0];
}

inline double bare(const Entry& e) {
    auto tks = tokens(e);
    if (tks.size() != 1) fail_at(e.line, "expected one dimensionless number");
    return to_num(tks[0], e);
}

inline long bare_int(const Entry& e) {
    double v = bare(e);
    auto l = static_cast<long>(v);
    if (static_cast<double>(l) != v) fail_at(e.line, "expected an integer");
    return l;
}

}  // namespace recipedetail

/// Parses an INI-style recipe. The sections layout, source, resist,
/// simulation, and sweep must be present along with their core keys; other
/// keys default. In strict mode unknown keys are errors; otherwise they are
/// reported through `warnings`.
inline Recipe parse_recipe(std::istream& is, bool strict = true,
                           std::vector<std::string>* warnings = nullptr) {
    using namespace recipedetail;
    RawMap raw = read_raw(is);
    Recipe r;

    for (const char* sec : {"layout", "source", "resist", "simulation", "sweep"}) {
        const std::string prefix = std::string(sec) + ".";
        auto it = raw.lower_bound(prefix);
        if (it == raw.end() || it->first.compare(0, prefix.size(), prefix) != 0)
            throw std::runtime_error(std::string("recipe error: missing section: ") + sec);
    }
    for (const char* key :
         {"layout.lattice", "layout.circumradius", "layout.region", "source.band",
          "resist.thickness", "resist.exposure_time", "resist.dose_threshold",
          "resist.dose_saturation", "simulation.grid_pitch", "sweep.gaps"}) {
        if (!raw.count(key))
            throw std::runtime_error(std::string("recipe error: missing key: ") + key);
    }

    if (const Entry* e = find(raw, "layout.lattice")) {
        auto lk = lattice_from_tag(e->value);
        if (!lk) fail_at(e->line, "unknown lattice '" + e->value + "'");
        r.layout.lattice = *lk;
    }
    if (const Entry* e = find(raw, "layout.circumradius")) r.layout.circumradius = length_um(*e);
    if (const Entry* e = find(raw, "layout.region")) {
        auto v = with_unit(*e, {"um"});
        if (v.size() != 4) fail_at(e->line, "region needs 'x0 y0 x1 y1 um'");
        r.layout.region = {{v[0], v[1]}, {v[2], v[3]}};
        if (r.layout.region.degenerate()) fail_at(e->line, "region is degenerate");
    }
    if (const Entry* e = find(raw, "layout.inclusion")) {
        if (e->value == "full_inside") r.layout.rule = InclusionRule::FullInside;
        else if (e->value == "centroid_inside") r.layout.rule = InclusionRule::CentroidInside;
        else fail_at(e->line, "inclusion must be full_inside or centroid_inside");
    }
    if (const Entry* e = find(raw, "layout.lattice_pitch")) r.layout.lattice_pitch = length_um(*e);

    if (const Entry* e = find(raw, "source.band")) {
        auto v = with_unit(*e, {"um", "nm"});
        if (v.size() != 2) fail_at(e->line, "band needs 'lo hi <unit>'");
        double s = tokens(*e).back() == "nm" ? 1e-3 : 1.0;
        r.source.band_lo_um = v[0] * s;
        r.source.band_hi_um = v[1] * s;
        if (!(r.source.band_lo_um > 0.0) || r.source.band_hi_um < r.source.band_lo_um)
            fail_at(e->line, "band must satisfy 0 < lo <= hi");
    }
    if (const Entry* e = find(raw, "source.lines")) {
        long v = bare_int(*e);
        if (v < 1) fail_at(e->line, "lines must be >= 1");
        r.source.lines = static_cast<int>(v);
    }
    if (const Entry* e = find(raw, "source.power"))
        r.source.power_mw_per_cm2 = one_value(*e, "mW/cm2");

    if (const Entry* e = find(raw, "resist.thickness")) r.resist.thickness_um = length_um(*e);
    if (const Entry* e = find(raw, "resist.exposure_time"))
        r.resist.exposure_s = one_value(*e, "s");
    if (const Entry* e = find(raw, "resist.dose_threshold"))
        r.resist.dose_threshold = one_value(*e, "mJ/cm2");
    if (const Entry* e = find(raw, "resist.dose_saturation"))
        r.resist.dose_saturation = one_value(*e, "mJ/cm2");
    if (const Entry* e = find(raw, "resist.gamma")) r.resist.gamma = bare(*e);
    if (const Entry* e = find(raw, "resist.absorption"))
        r.resist.absorption = one_value(*e, "1/um");
    if (const Entry* e = find(raw, "resist.blur_sigma")) r.resist.blur_sigma_um = length_um(*e);

    if (const Entry* e = find(raw, "simulation.grid_pitch")) r.raster.pitch = length_um(*e);
    if (const Entry* e = find(raw, "simulation.edge_linewidth"))
        r.raster.edge_linewidth = length_um(*e);
    if (const Entry* e = find(raw, "simulation.supersample")) {
        long v = bare_int(*e);
        if (v < 1) fail_at(e->line, "supersample must be >= 1");
        r.raster.supersample = static_cast<int>(v);
    }
    if (const Entry* e = find(raw, "simulation.max_grid")) {
        long v = bare_int(*e);
        if (v < 16) fail_at(e->line, "max_grid must be >= 16");
        r.prop.max_grid = static_cast<std::size_t>(v);
    }
    if (const Entry* e = find(raw, "simulation.spectral_tail")) {
        r.prop.spectral_power_tail = bare(*e);
        if (!(r.prop.spectral_power_tail > 0.0) || r.prop.spectral_power_tail >= 1.0)
            fail_at(e->line, "spectral_tail must be in (0, 1)");
    }
    if (const Entry* e = find(raw, "simulation.guard")) {
        r.guard_um = length_um(*e);
        if (r.guard_um < 0.0) fail_at(e->line, "guard must be >= 0");
    }

    if (const Entry* e = find(raw, "sweep.gaps")) {
        r.gaps_um = with_unit(*e, {"um"});
        if (r.gaps_um.empty()) fail_at(e->line, "gaps list is empty");
        for (std::size_t i = 0; i < r.gaps_um.size(); ++i) {
            if (r.gaps_um[i] < 0.0) fail_at(e->line, "gaps must be >= 0");
            if (i > 0 && !(r.gaps_um[i] > r.gaps_um[i - 1]))
                fail_at(e->line, "gaps must be strictly increasing");
        }
    }

    if (const Entry* e = find(raw, "metrology.plateau_fraction"))
        r.thresholds.plateau_fraction = bare(*e);
    if (const Entry* e = find(raw, "metrology.modulation_min"))
        r.thresholds.modulation_min = bare(*e);
    if (const Entry* e = find(raw, "metrology.sag_min")) r.thresholds.sag_min_um = length_um(*e);

    if (const Entry* e = find(raw, "expected.regimes")) {
        for (const std::string& t : tokens(*e)) {
            auto reg = regime_from_tag(t);
            if (!reg) fail_at(e->line, "unknown regime '" + t + "'");
            r.expected_regimes.push_back(*reg);
        }
        if (r.expected_regimes.size() != r.gaps_um.size())
            fail_at(e->line, "expected.regimes needs one tag per gap (" +
                                 std::to_string(r.gaps_um.size()) + ")");
    }

    std::vector<std::string> unknown;
    for (const auto& [k, e] : raw)
        if (!e.used) unknown.push_back("line " + std::to_string(e.line) + ": unknown key '" +
                                       k + "'");
    if (!unknown.empty()) {
        if (strict) {
            std::string msg = "recipe has unknown keys (strict mode):";
            for (const auto& u : unknown) msg += "\n  " + u;
            throw std::runtime_error(msg);
        }
        if (warnings)
            for (auto& u : unknown) warnings->push_back(u);
    }
    return r;
}

inline Recipe parse_recipe_string(const std::string& text, bool strict = true,
                                  std::vector<std::string>* warnings = nullptr) {
    std::istringstream is(text);
    return parse_recipe(is, strict, warnings);
}

inline Recipe parse_recipe_file(const std::string& path, bool strict = true,
                                std::vector<std::string>* warnings = nullptr) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open recipe: " + path);
    return parse_recipe(is, strict, warnings);
}

/// Canonical text form; parsing it reproduces the same recipe.
inline std::string print_recipe(const Recipe& r) {
    std::ostringstream os;
    os.precision(17);
    os << "[layout]\n";
    os << "lattice = " << lattice_tag(r.layout.lattice) << '\n';
    os << "circumradius = " << r.layout.circumradius << " um\n";
    os << "region = " << r.layout.region.lo.x << ' ' << r.layout.region.lo.y << ' '
       << r.layout.region.hi.x << ' ' << r.layout.region.hi.y << " um\n";
    os << "inclusion = "
       << (r.layout.rule == InclusionRule::FullInside ? "full_inside" : "centroid_inside")
       << '\n';
    os << "lattice_pitch = " << r.layout.lattice_pitch << " um\n";
    os << "\n[source]\n";
    os << "band = " << r.source.band_lo_um << ' ' << r.source.band_hi_um << " um\n";
    os << "lines = " << r.source.lines << '\n';
    os << "power = " << r.source.power_mw_per_cm2 << " mW/cm2\n";
    os << "\n[resist]\n";
    os << "thickness = " << r.resist.thickness_um << " um\n";
    os << "exposure_time = " << r.resist.exposure_s << " s\n";
    os << "dose_threshold = " << r.resist.dose_threshold << " mJ/cm2\n";
    os << "dose_saturation = " << r.resist.dose_saturation << " mJ/cm2\n";
    os << "gamma = " << r.resist.gamma << '\n';
    os << "absorption = " << r.resist.absorption << " 1/um\n";
    os << "blur_sigma = " << r.resist.blur_sigma_um << " um\n";
    os << "\n[simulation]\n";
    os << "grid_pitch = " << r.raster.pitch << " um\n";
    os << "edge_linewidth = " << r.raster.edge_linewidth << " um\n";
    os << "supersample = " << r.raster.supersample << '\n';
    os << "max_grid = " << r.prop.max_grid << '\n';
    os << "spectral_tail = " << r.prop.spectral_power_tail << '\n';
    os << "guard = " << r.guard_um << " um\n";
    os << "\n[sweep]\n";
    os << "gaps =";
    for (double g : r.gaps_um) os << ' ' << g;
    os << " um\n";
    os << "\n[metrology]\n";
    os << "plateau_fraction = " << r.thresholds.plateau_fraction << '\n';
    os << "modulation_min = " << r.thresholds.modulation_min << '\n';
    os << "sag_min = " << r.thresholds.sag_min_um << " um\n";
    if (!r.expected_regimes.empty()) {
        os << "\n[expected]\n";
        os << "regimes =";
        for (LensRegime reg : r.expected_regimes) os << ' ' << regime_tag(reg);
        os << '\n';
    }
    return os.str();
}

}  // namespace proxlith

// proxlith: UV proximity printing of microlens arrays, end to end.
// Subcommands cover the pipeline from mask layout to developed surface
// metrics; everything is driven by one recipe file.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "proxlith/proxlith.hpp"

namespace {

using namespace proxlith;

struct GlobalArgs {
    std::string recipe_path;
    std::string out;
    std::string preset;  // "", "smoke", "full"
    int threads = 1;
    bool strict = true;
};

Recipe load_recipe(const GlobalArgs& g) {
    Recipe r;
    std::vector<std::string> warnings;
    if (!g.recipe_path.empty())
        r = parse_recipe_file(g.recipe_path, g.strict, &warnings);
    for (const auto& w : warnings) std::cerr << "recipe warning: " << w << '\n';

    std::string preset = g.preset;
    if (preset.empty()) {
        if (const char* env = std::getenv("PROXLITH_PRESET")) preset = env;
    }
    if (preset == "smoke") {
        // coarse, fast settings for CI-style runs
        r.raster.pitch = std::max(r.raster.pitch, 2.0);
        r.raster.supersample = std::min(r.raster.supersample, 2);
        r.source.lines = std::min(r.source.lines, 3);
    } else if (!preset.empty() && preset != "full") {
        throw std::runtime_error("unknown preset '" + preset + "' (use smoke or full)");
    }
    return r;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open for write: " + path);
    return file;
}

void cmd_layout(const GlobalArgs& g) {
    Recipe r = load_recipe(g);
    MaskLayout l = make_layout(r.layout);
    std::ofstream file;
    write_layout(open_out(file, g.out), l);
    std::cerr << "lenses " << count_lenses(l) << ", fill "
              << fill_factor(l, LensFootprint::AsAperture) << " (as aperture), "
              << fill_factor(l, LensFootprint::InscribedCircle) << " (inscribed circle)\n";
}

void cmd_rasterize(const GlobalArgs& g) {
    if (g.out.empty()) throw std::runtime_error("rasterize needs --out");
    Recipe r = load_recipe(g);
    GridFile gf;
    gf.type = "transmission";
    gf.unit = "1";
    gf.grid = rasterize(make_layout(r.layout), r.raster);
    gf.comment = "recipe " + content_hash(print_recipe(r));
    write_grid_file(g.out, gf);
}

void cmd_image(const GlobalArgs& g, double gap) {
    if (g.out.empty()) throw std::runtime_error("image needs --out");
    Recipe r = load_recipe(g);
    Grid2<double> trans = guarded_transmission(r);
    Grid2<double> aerial = aerial_image(trans, r.source.make(), gap, r.prop, g.threads);
    const std::size_t off = procdetail::guard_cells(r);
    GridFile gf;
    gf.type = "intensity";
    gf.unit = "1";
    gf.grid = procdetail::crop(aerial, off, trans.nx - 2 * off, trans.ny - 2 * off);
    gf.gap_um = gap;
    gf.comment = "recipe " + content_hash(print_recipe(r));
    write_grid_file(g.out, gf);
}

void cmd_simulate(const GlobalArgs& g, double gap) {
    if (g.out.empty()) throw std::runtime_error("simulate needs --out (used as a prefix)");
    Recipe r = load_recipe(g);
    ProcessResult pr = simulate_process(r, gap, g.threads);
    const std::string hash = content_hash(print_recipe(r));
    auto dump = [&](const std::string& tag, const std::string& unit,
                    const Grid2<double>& grid) {
        GridFile gf;
        gf.type = tag;
        gf.unit = unit;
        gf.grid = grid;
        gf.gap_um = gap;
        gf.comment = "recipe " + hash;
        write_grid_file(g.out + "_" + tag + ".txt", gf);
    };
    dump("transmission", "1", pr.transmission);
    dump("intensity", "1", pr.aerial);
    dump("dose", "mJ/cm2", pr.dose);
    dump("height", "um", pr.surface);
    std::cerr << "wrote " << g.out << "_{transmission,intensity,dose,height}.txt\n";
}

void cmd_sweep(const GlobalArgs& g) {
    Recipe r = load_recipe(g);
    SweepResult s;
    if (g.out.empty()) {
        s = run_sweep(r, g.threads);
        write_sweep_csv(std::cout, s);
    } else {
        s = run_sweep_to_dir(r, g.out, g.threads);
        std::cerr << "wrote " << g.out << "/sweep.csv and per-gap height grids\n";
    }
    bool failed = false;
    for (const GapResult& gr : s.gaps)
        if (!gr.error.empty()) {
            std::cerr << "gap " << gr.gap_um << " um failed: " << gr.error << '\n';
            failed = true;
        }
    if (failed) throw std::runtime_error("sweep had failing gaps");
}

void cmd_calibrate(const GlobalArgs& g) {
    Recipe r = load_recipe(g);
    CalibrationResult c = calibrate_resist(r, {}, g.threads);
    std::cerr << c.log;
    std::cerr << "evaluations " << c.evaluations << ", mismatches " << c.mismatches
              << ", margin " << c.margin << '\n';
    for (std::size_t i = 0; i < c.labels.size(); ++i)
        std::cerr << "  gap " << r.gaps_um[i] << " um: " << regime_tag(c.labels[i])
                  << " (want " << regime_tag(r.expected_regimes[i]) << ")\n";
    Recipe out = r;
    out.resist = c.resist;
    std::ofstream file;
    open_out(file, g.out) << print_recipe(out);
    if (!c.success) throw std::runtime_error("calibration did not reach the expected labels");
}

void cmd_metrics(const GlobalArgs& g, const std::string& surface_path) {
    Recipe r = load_recipe(g);
    GridFile gf = read_grid_file(surface_path);
    if (gf.type != "height")
        throw std::runtime_error("metrics expects a height grid, got type '" + gf.type + "'");
    MaskLayout l = make_layout(r.layout);
    l.apertures = harnessdetail::measured_lenses(r);
    std::size_t skipped = 0;
    auto rows = classify_regime(gf.grid, l, r.resist.thickness_um, r.thresholds, &skipped);
    if (skipped)
        std::cerr << "warning: " << skipped << " lens(es) without usable samples skipped\n";
    std::ofstream file;
    std::ostream& os = open_out(file, g.out);
    os << "lens_id,sag_um,roc_um,rms_dev_um,plateau_fraction,modulation_depth,regime\n";
    char buf[40];
    auto num = [&](double v) -> std::string {
        if (!std::isfinite(v)) return "";
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return buf;
    };
    for (const LensMetrics& m : rows) {
        os << m.lens_id << ',' << num(m.sag) << ','
           << (m.sphere_ok ? num(m.sphere.radius) : "") << ','
           << (m.sphere_ok ? num(m.sphere.rms) : "") << ',' << num(m.plateau_fraction) << ','
           << num(m.modulation) << ',' << regime_tag(m.regime) << '\n';
    }
}

void cmd_section(const GlobalArgs& g, const std::string& grid_path, const std::string& axis,
                 double coord) {
    GridFile gf = read_grid_file(grid_path);
    Axis ax = axis == "y" ? Axis::Y : Axis::X;
    Section s = cross_section(gf.grid, ax, coord);
    std::ofstream file;
    std::ostream& os = open_out(file, g.out);
    os << "# pos_um value (" << gf.type << ", unit " << gf.unit << ")\n";
    char buf[40];
    for (std::size_t i = 0; i < s.pos.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", s.pos[i]);
        os << buf << ' ';
        std::snprintf(buf, sizeof buf, "%.9g", s.val[i]);
        os << buf << '\n';
    }
}

void cmd_packing(const GlobalArgs& g) {
    Recipe r = load_recipe(g);
    auto rows = packing_study(r.layout.circumradius, r.layout.region, r.layout.rule);
    std::ofstream file;
    write_packing_csv(open_out(file, g.out), rows);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"proximity lithography simulator for microlens arrays"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("-r,--recipe", g.recipe_path, "recipe file (defaults built in)");
    app.add_option("-o,--out", g.out, "output path (stdout for text outputs if omitted)");
    app.add_option("-t,--threads", g.threads, "worker threads (0 = hardware)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("-p,--preset", g.preset, "smoke or full (or PROXLITH_PRESET)");
    app.add_flag("!--lenient", g.strict, "tolerate unknown recipe keys");

    auto* c_layout = app.add_subcommand("layout", "emit the mask layout as text");
    auto* c_raster = app.add_subcommand("rasterize", "emit the transmission grid");
    double gap_image = 0.0, gap_sim = 0.0;
    auto* c_image = app.add_subcommand("image", "aerial image at one gap");
    c_image->add_option("-g,--gap", gap_image, "mask-resist gap in um")->required();
    auto* c_sim = app.add_subcommand("simulate", "full print at one gap (grids by prefix)");
    c_sim->add_option("-g,--gap", gap_sim, "mask-resist gap in um")->required();
    auto* c_sweep = app.add_subcommand(
        "sweep", "run all recipe gaps; --out names a directory for grids + summary");
    auto* c_cal = app.add_subcommand("calibrate", "fit resist params to expected regimes");
    std::string surface_path;
    auto* c_metrics = app.add_subcommand("metrics", "per-lens metrics from a height grid");
    c_metrics->add_option("-i,--in", surface_path, "height grid file")->required();
    std::string sec_grid, sec_axis = "x";
    double sec_coord = 0.0;
    auto* c_section = app.add_subcommand("section", "1-D cut through a grid file");
    c_section->add_option("-i,--in", sec_grid, "grid file")->required();
    c_section->add_option("-a,--axis", sec_axis, "x or y")
        ->check(CLI::IsMember({"x", "y"}));
    c_section->add_option("-c,--coord", sec_coord, "cut coordinate in um")->required();
    auto* c_pack = app.add_subcommand("packing", "lens counts and fill factors per lattice");

    for (CLI::App* sub : {c_layout, c_raster, c_image, c_sim, c_sweep, c_cal, c_metrics,
                          c_section, c_pack})
        sub->fallthrough();  // accept the global options after the subcommand too

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // 1: usage error (0 for --help/--version)
    }

    try {
        if (c_layout->parsed()) cmd_layout(g);
        else if (c_raster->parsed()) cmd_rasterize(g);
        else if (c_image->parsed()) cmd_image(g, gap_image);
        else if (c_sim->parsed()) cmd_simulate(g, gap_sim);
        else if (c_sweep->parsed()) cmd_sweep(g);
        else if (c_cal->parsed()) cmd_calibrate(g);
        else if (c_metrics->parsed()) cmd_metrics(g, surface_path);
        else if (c_section->parsed()) cmd_section(g, sec_grid, sec_axis, sec_coord);
        else if (c_pack->parsed()) cmd_packing(g);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;  // runtime failure
    }
    return 0;
}

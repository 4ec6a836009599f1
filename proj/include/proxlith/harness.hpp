#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "proxlith/grid_io.hpp"
#include "proxlith/hash.hpp"
#include "proxlith/metrology.hpp"
#include "proxlith/parallel.hpp"
#include "proxlith/process.hpp"
#include "proxlith/recipe.hpp"

namespace proxlith {

struct GapResult {
    double gap_um = 0.0;
    std::string error;  // nonempty if this gap failed; other fields unset then
    std::size_t lens_count = 0;
    std::array<std::size_t, 3> regime_counts{};  // flat_top, convex, blurred
    LensRegime label = LensRegime::Blurred;
    double esw_um = std::numeric_limits<double>::quiet_NaN();
    double sag_um = std::numeric_limits<double>::quiet_NaN();
    double roc_um = std::numeric_limits<double>::quiet_NaN();
    double plateau_fraction = std::numeric_limits<double>::quiet_NaN();
    double modulation = std::numeric_limits<double>::quiet_NaN();
    double realized_fill = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
    std::string recipe_text;  // canonical recipe echo
    std::string recipe_hash;  // provenance stamp of the canonical text
    std::vector<GapResult> gaps;
};

namespace harnessdetail {

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Lenses of the recipe's region whose footprint stays clear of the crop
/// boundary, in generation order.
inline std::vector<ApertureSpec> measured_lenses(const Recipe& r) {
    MaskLayout l = make_layout(r.layout);
    const Rect safe = r.layout.region.grown(-2.0 * r.raster.pitch);
    std::vector<ApertureSpec> out;
    for (const ApertureSpec& a : l.apertures) {
        bool ok = true;
        if (a.is_circle()) {
            ok = a.center.x - a.circumradius >= safe.lo.x &&
                 a.center.x + a.circumradius <= safe.hi.x &&
                 a.center.y - a.circumradius >= safe.lo.y &&
                 a.center.y + a.circumradius <= safe.hi.y;
        } else {
            for (const Vec2& v : vertices(a))
                if (!(v.x >= safe.lo.x && v.x <= safe.hi.x && v.y >= safe.lo.y &&
                      v.y <= safe.hi.y)) {
                    ok = false;
                    break;
                }
        }
        if (ok) out.push_back(a);
    }
    return out;
}

/// Majority regime; ties go to the earliest in (flat_top, convex, blurred).
inline LensRegime majority_label(const std::array<std::size_t, 3>& counts) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < 3; ++k)
        if (counts[k] > counts[best]) best = k;
    return static_cast<LensRegime>(best);
}

/// Signed robustness of one lens's metrics against the expected regime's
/// decision boundary, in threshold-relative units (>0 iff classified as
/// expected).
inline double regime_margin(const LensMetrics& m, LensRegime expected,
                            const RegimeThresholds& th) {
    const double p = (m.plateau_fraction - th.plateau_fraction) / th.plateau_fraction;
    const double mod = (m.modulation - th.modulation_min) / th.modulation_min;
    const double sag = (m.sag - th.sag_min_um) / th.sag_min_um;
    switch (expected) {
        case LensRegime::FlatTop: return p;
        case LensRegime::Convex: return std::min({-p, mod, sag});
        case LensRegime::Blurred: return std::min(-p, std::max(-mod, -sag));
    }
    return 0.0;
}

inline GapResult measure_gap(const Recipe& r, double gap_um,
                             const std::vector<ApertureSpec>& lenses, int threads,
                             const std::string& out_dir, const std::string& recipe_hash) {
    GapResult gr;
    gr.gap_um = gap_um;
    ProcessResult pr = simulate_process(r, gap_um, threads);
    std::vector<double> sags, rocs, plateaus, mods;
    for (const ApertureSpec& lens : lenses) {
        LensMetrics m = lens_metrics(pr.guarded_surface, lens, r.resist.thickness_um);
        LensRegime reg = classify_regime(m, r.thresholds);
        ++gr.regime_counts[static_cast<std::size_t>(reg)];
        sags.push_back(m.sag);
        plateaus.push_back(m.plateau_fraction);
        mods.push_back(m.modulation);
        if (m.sphere_ok) rocs.push_back(m.sphere.radius);
    }
    gr.lens_count = lenses.size();
    gr.label = majority_label(gr.regime_counts);
    gr.sag_um = mean(sags);
    gr.roc_um = mean(rocs);
    gr.plateau_fraction = mean(plateaus);
    gr.modulation = mean(mods);

    MaskLayout over = pr.layout;
    over.region = r.layout.region;
    gr.realized_fill =
        realized_fill_factor(pr.guarded_surface, over, r.thresholds.sag_min_um);

    Grid2<double> ref = reference_aerial(r, gap_um, threads);
    Section sec = cross_section(ref, Axis::Y, ref.sample_domain().center().x);
    gr.esw_um = edge_spread_width(sec);

    if (!out_dir.empty()) {
        char name[64];
        std::snprintf(name, sizeof name, "height_gap%04d.txt",
                      static_cast<int>(std::lround(gap_um)));
        GridFile gf;
        gf.type = "height";
        gf.unit = "um";
        gf.grid = pr.surface;
        gf.gap_um = gap_um;
        gf.comment = "recipe " + recipe_hash;
        write_grid_file((std::filesystem::path(out_dir) / name).string(), gf);
    }
    return gr;
}

}  // namespace harnessdetail

/// Full gap sweep: per gap, print + measure every interior lens, label the
/// gap by majority regime, and record the isolated-aperture edge spread.
/// Failures are isolated per gap. Gap order in the result matches the
/// recipe regardless of thread count. A nonempty out_dir receives one
/// developed-height grid per gap.
inline SweepResult run_sweep(const Recipe& r, int threads = 1,
                             const std::string& out_dir = "") {
    if (r.gaps_um.empty()) throw std::invalid_argument("run_sweep: recipe has no gaps");
    const auto lenses = harnessdetail::measured_lenses(r);
    if (lenses.empty())
        throw std::invalid_argument("run_sweep: no lens lies fully inside the region");
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    SweepResult res;
    res.recipe_text = print_recipe(r);
    res.recipe_hash = content_hash(res.recipe_text);
    res.gaps.resize(r.gaps_um.size());
    parallel_for(r.gaps_um.size(), threads, [&](std::size_t gi) {
        try {
            res.gaps[gi] = harnessdetail::measure_gap(r, r.gaps_um[gi], lenses, 1, out_dir,
                                                      res.recipe_hash);
        } catch (const std::exception& e) {
            res.gaps[gi] = GapResult{};
            res.gaps[gi].gap_um = r.gaps_um[gi];
            res.gaps[gi].error = e.what();
        }
    });
    return res;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& s);

/// run_sweep plus the summary table written as <out_dir>/sweep.csv.
inline SweepResult run_sweep_to_dir(const Recipe& r, const std::string& out_dir,
                                    int threads = 1) {
    if (out_dir.empty()) throw std::invalid_argument("run_sweep_to_dir: empty output dir");
    SweepResult res = run_sweep(r, threads, out_dir);
    std::ofstream os(std::filesystem::path(out_dir) / "sweep.csv");
    if (!os) throw std::runtime_error("cannot write sweep summary in " + out_dir);
    write_sweep_csv(os, res);
    return res;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& s) {
    os << "# proxlith sweep v1\n";
    os << "# recipe " << s.recipe_hash << '\n';
    std::istringstream echo(s.recipe_text);
    for (std::string line; std::getline(echo, line);) os << "# " << line << '\n';
    os << "gap_um,label,lenses,flat_top,convex,blurred,esw_um,sag_um,roc_um,"
          "plateau_fraction,modulation,realized_fill,error\n";
    char buf[40];
    auto num = [&](double v) -> std::string {
        if (!std::isfinite(v)) return "";
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return buf;
    };
    for (const GapResult& g : s.gaps) {
        std::string err = g.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        if (!g.error.empty()) {
            os << num(g.gap_um) << ",,,,,,,,,,,," << err << '\n';
            continue;
        }
        os << num(g.gap_um) << ',' << regime_tag(g.label) << ',' << g.lens_count << ','
           << g.regime_counts[0] << ',' << g.regime_counts[1] << ',' << g.regime_counts[2]
           << ',' << num(g.esw_um) << ',' << num(g.sag_um) << ',' << num(g.roc_um) << ','
           << num(g.plateau_fraction) << ',' << num(g.modulation) << ','
           << num(g.realized_fill) << ",\n";
    }
}

// ---------------------------------------------------------------------------
// Resist calibration: search (dose_threshold, saturation, gamma, blur sigma)
// until the per-gap labels match the recipe's expected regimes. Aerial
// images do not depend on the resist, so they are computed once per gap and
// every candidate costs only pointwise work.
// ---------------------------------------------------------------------------

struct CalibrationSpace {
    double threshold_lo = 5.0, threshold_hi = 150.0;  // mJ/cm2
    double sat_ratio_lo = 1.2, sat_ratio_hi = 8.0;    // saturation / threshold
    double gamma_lo = 0.5, gamma_hi = 3.0;
    double sigma_lo = 0.0, sigma_hi = 3.0;  // um
    int threshold_steps = 10;
    int sat_steps = 6;
    int gamma_steps = 4;
    int sigma_steps = 4;
    int refine_rounds = 1;  // range shrinks after the first descent
    int max_cycles = 3;     // coordinate passes per round
    int budget = 600;       // hard cap on candidate evaluations
};

struct CalibrationResult {
    ResistRecipe resist;
    int mismatches = -1;
    double margin = -std::numeric_limits<double>::infinity();  // min over gaps
    std::vector<LensRegime> labels;
    bool success = false;
    int evaluations = 0;
    std::string log;
};

namespace harnessdetail {

struct CalCtx {
    const Recipe* recipe = nullptr;
    std::vector<ApertureSpec> lenses;
    std::vector<Grid2<double>> dose0;  // per gap, unblurred, guarded grid
    std::size_t crop_off = 0, crop_nx = 0, crop_ny = 0;
    double cached_sigma = -1.0;
    std::vector<Grid2<double>> dose_blur;  // per gap at cached_sigma
    int threads = 1;

    const std::vector<Grid2<double>>& doses(double sigma) {
        if (sigma == 0.0) return dose0;
        if (sigma != cached_sigma) {
            dose_blur.resize(dose0.size());
            parallel_for(dose0.size(), threads,
                         [&](std::size_t i) { dose_blur[i] = blur_dose(dose0[i], sigma); });
            cached_sigma = sigma;
        }
        return dose_blur;
    }
};

struct CalScore {
    int mismatches = std::numeric_limits<int>::max();
    double margin = -std::numeric_limits<double>::infinity();
    bool better_than(const CalScore& o) const {
        if (mismatches != o.mismatches) return mismatches < o.mismatches;
        return margin > o.margin + 1e-12;
    }
};

inline CalScore evaluate_candidate(CalCtx& ctx, const ResistRecipe& cand,
                                   std::vector<LensRegime>* labels_out = nullptr) {
    const Recipe& r = *ctx.recipe;
    const auto& doses = ctx.doses(cand.blur_sigma_um);
    CalScore score;
    score.mismatches = 0;
    score.margin = std::numeric_limits<double>::infinity();
    if (labels_out) labels_out->clear();
    for (std::size_t gi = 0; gi < doses.size(); ++gi) {
        Grid2<double> surf = procdetail::crop(doses[gi], ctx.crop_off, ctx.crop_nx, ctx.crop_ny);
        for (double& v : surf.data) v = cand.height_of(v);
        std::array<std::size_t, 3> counts{};
        std::vector<double> margins;
        for (const ApertureSpec& lens : ctx.lenses) {
            LensMetrics m = lens_metrics(surf, lens, cand.thickness_um, false);
            ++counts[static_cast<std::size_t>(classify_regime(m, r.thresholds))];
            margins.push_back(regime_margin(m, r.expected_regimes[gi], r.thresholds));
        }
        LensRegime label = majority_label(counts);
        if (labels_out) labels_out->push_back(label);
        if (label != r.expected_regimes[gi]) ++score.mismatches;
        score.margin = std::min(score.margin, median(margins));
    }
    return score;
}

inline std::vector<double> log_lattice(double lo, double hi, int n) {
    std::vector<double> v;
    if (n <= 1 || hi <= lo) return {lo};
    for (int i = 0; i < n; ++i)
        v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1.0)));
    return v;
}

inline std::vector<double> lin_lattice(double lo, double hi, int n) {
    std::vector<double> v;
    if (n <= 1 || hi <= lo) return {lo};
    for (int i = 0; i < n; ++i)
        v.push_back(lo + (hi - lo) * static_cast<double>(i) / (n - 1.0));
    return v;
}

}  // namespace harnessdetail

/// Deterministic lattice search (coordinate descent plus one range
/// refinement) for resist parameters reproducing `recipe.expected_regimes`.
/// The recipe must carry expected regimes.
inline CalibrationResult calibrate_resist(const Recipe& recipe,
                                          const CalibrationSpace& space = {},
                                          int threads = 1) {
    using namespace harnessdetail;
    if (recipe.expected_regimes.size() != recipe.gaps_um.size())
        throw std::invalid_argument(
            "calibrate_resist: recipe needs one expected regime per gap");

    CalCtx ctx;
    ctx.recipe = &recipe;
    ctx.threads = threads;
    ctx.lenses = measured_lenses(recipe);
    if (ctx.lenses.empty())
        throw std::invalid_argument("calibrate_resist: no lens lies fully inside the region");

    Grid2<double> trans = guarded_transmission(recipe);
    ctx.crop_off = procdetail::guard_cells(recipe);
    ctx.crop_nx = trans.nx - 2 * ctx.crop_off;
    ctx.crop_ny = trans.ny - 2 * ctx.crop_off;
    const SourceSpec src = recipe.source.make();
    ctx.dose0.resize(recipe.gaps_um.size());
    parallel_for(recipe.gaps_um.size(), threads, [&](std::size_t gi) {
        Grid2<double> aerial = aerial_image(trans, src, recipe.gaps_um[gi], recipe.prop, 1);
        ctx.dose0[gi] = accumulate_dose(aerial, src, recipe.resist);
    });

    std::ostringstream log;
    CalibrationResult out;
    out.resist = recipe.resist;
    out.resist.absorption = 0.0;  // search the contrast-curve mode

    struct Scored {
        ResistRecipe resist;
        CalScore score;
    };
    std::optional<Scored> global;
    int evals = 0;

    auto evaluate = [&](ResistRecipe cand) -> std::optional<Scored> {
        if (evals >= space.budget) return std::nullopt;
        cand.dose_saturation = std::max(cand.dose_saturation, cand.dose_threshold * 1.01);
        CalScore s = evaluate_candidate(ctx, cand);
        ++evals;
        if (!global || s.better_than(global->score)) global = Scored{cand, s};
        return Scored{cand, s};
    };

    ResistRecipe center = out.resist;
    center.dose_threshold = std::sqrt(space.threshold_lo * space.threshold_hi);
    center.dose_saturation =
        center.dose_threshold * std::sqrt(space.sat_ratio_lo * space.sat_ratio_hi);
    center.gamma = std::clamp(1.0, space.gamma_lo, space.gamma_hi);
    center.blur_sigma_um = 0.0;
    {
        ResistRecipe c = center;
        c.dose_saturation = std::max(c.dose_saturation, c.dose_threshold * 1.01);
        global = Scored{c, evaluate_candidate(ctx, c)};
        evals = 1;
    }

    // seed with a coarse joint lattice; one-axis descent gets trapped when
    // threshold, saturation, and gamma interact (an underexposed sequence
    // needs all three high at once), so each gamma family contributes its
    // own descent start. The mid gamma goes first so a tight budget still
    // covers the full threshold/saturation plane.
    std::vector<double> g_seeds{center.gamma};
    for (double g : {space.gamma_lo, space.gamma_hi})
        if (g != g_seeds.front()) g_seeds.push_back(g);
    std::vector<Scored> starts;
    auto seed_family = [&](double g) -> std::optional<Scored> {
        std::optional<Scored> win;
        for (double th : log_lattice(space.threshold_lo, space.threshold_hi, 5))
            for (double sr : log_lattice(space.sat_ratio_lo, space.sat_ratio_hi, 4))
                for (double s :
                     lin_lattice(space.sigma_lo, space.sigma_hi, space.sigma_steps)) {
                    ResistRecipe c = center;
                    c.dose_threshold = th;
                    c.dose_saturation = th * sr;
                    c.gamma = g;
                    c.blur_sigma_um = s;
                    auto sc = evaluate(c);
                    if (!sc) return win;  // budget spent
                    if (!win || sc->score.better_than(win->score)) win = *sc;
                }
        return win;
    };
    for (double g : g_seeds)
        if (auto win = seed_family(g)) starts.push_back(*win);
    if (starts.empty()) starts.push_back(*global);
    std::stable_sort(starts.begin(), starts.end(), [](const Scored& a, const Scored& b) {
        return a.score.better_than(b.score);
    });
    starts.erase(std::unique(starts.begin(), starts.end(),
                             [](const Scored& a, const Scored& b) {
                                 return a.resist.dose_threshold == b.resist.dose_threshold &&
                                        a.resist.dose_saturation ==
                                            b.resist.dose_saturation &&
                                        a.resist.gamma == b.resist.gamma &&
                                        a.resist.blur_sigma_um == b.resist.blur_sigma_um;
                             }),
                 starts.end());
    log << "seed: mismatches " << global->score.mismatches << ", margin "
        << global->score.margin << ", " << starts.size() << " starts\n";

    // coordinate descent from each start, ranges shrinking once around the
    // incumbent; the best point seen anywhere wins
    for (std::size_t si = 0; si < starts.size() && evals < space.budget; ++si) {
        ResistRecipe best = starts[si].resist;
        CalScore best_score = starts[si].score;
        double th_lo = space.threshold_lo, th_hi = space.threshold_hi;
        double sr_lo = space.sat_ratio_lo, sr_hi = space.sat_ratio_hi;
        double g_lo = space.gamma_lo, g_hi = space.gamma_hi;
        double s_lo = space.sigma_lo, s_hi = space.sigma_hi;

        auto try_candidate = [&](ResistRecipe cand) {
            auto sc = evaluate(std::move(cand));
            if (sc && sc->score.better_than(best_score)) {
                best_score = sc->score;
                best = sc->resist;
                return true;
            }
            return false;
        };

        for (int round = 0; round <= space.refine_rounds; ++round) {
            for (int cycle = 0; cycle < space.max_cycles; ++cycle) {
                bool improved = false;
                for (double th : log_lattice(th_lo, th_hi, space.threshold_steps)) {
                    ResistRecipe c = best;
                    double ratio = best.dose_saturation / best.dose_threshold;
                    c.dose_threshold = th;
                    c.dose_saturation = th * ratio;
                    improved |= try_candidate(c);
                }
                for (double sr : log_lattice(sr_lo, sr_hi, space.sat_steps)) {
                    ResistRecipe c = best;
                    c.dose_saturation = best.dose_threshold * sr;
                    improved |= try_candidate(c);
                }
                for (double g : log_lattice(g_lo, g_hi, space.gamma_steps)) {
                    ResistRecipe c = best;
                    c.gamma = g;
                    improved |= try_candidate(c);
                }
                for (double s : lin_lattice(s_lo, s_hi, space.sigma_steps)) {
                    ResistRecipe c = best;
                    c.blur_sigma_um = s;
                    improved |= try_candidate(c);
                }
                log << "start " << si << " round " << round << " cycle " << cycle
                    << ": mismatches " << best_score.mismatches << ", margin "
                    << best_score.margin << '\n';
                if (!improved) break;
            }
            if (round == space.refine_rounds) break;
            // shrink each range geometrically around the incumbent
            auto shrink_log = [](double& lo, double& hi, double best_v) {
                double span = std::pow(hi / lo, 0.35);
                double nlo = best_v / span, nhi = best_v * span;
                lo = std::max(lo, nlo);
                hi = std::min(hi, nhi);
                if (hi <= lo) hi = lo * 1.01;
            };
            shrink_log(th_lo, th_hi, best.dose_threshold);
            shrink_log(sr_lo, sr_hi, best.dose_saturation / best.dose_threshold);
            shrink_log(g_lo, g_hi, best.gamma);
            double half = 0.35 * (s_hi - s_lo);
            s_lo = std::max(space.sigma_lo, best.blur_sigma_um - half);
            s_hi = std::min(space.sigma_hi, best.blur_sigma_um + half);
        }
    }

    out.resist = global->resist;
    out.mismatches = global->score.mismatches;
    out.margin = global->score.margin;
    out.success = global->score.mismatches == 0;
    out.evaluations = evals;
    evaluate_candidate(ctx, global->resist, &out.labels);
    out.log = log.str();
    return out;
}

// ---------------------------------------------------------------------------
// Packing study: lens counts and fill factors across lattice types
// ---------------------------------------------------------------------------

struct PackingRow {
    LatticeKind lattice;
    std::size_t count = 0;
    double fill_aperture = 0.0;       // realized, footprint as drawn
    double fill_inscribed = 0.0;      // realized, inscribed-circle footprint
    double ideal_aperture = 0.0;      // infinite-lattice unit cell
    double ideal_inscribed = 0.0;
};

inline std::vector<PackingRow> packing_study(double circumradius, const Rect& region,
                                             InclusionRule rule = InclusionRule::FullInside) {
    std::vector<PackingRow> rows;
    for (LatticeKind k :
         {LatticeKind::TriangularGapless, LatticeKind::SquareGapless, LatticeKind::HexGapless,
          LatticeKind::SquareLattice, LatticeKind::HexLattice}) {
        MaskLayout l = generate_gapless_array(k, circumradius, region, rule);
        PackingRow row;
        row.lattice = k;
        row.count = count_lenses(l);
        row.fill_aperture = fill_factor(l, LensFootprint::AsAperture);
        row.fill_inscribed = fill_factor(l, LensFootprint::InscribedCircle);
        row.ideal_aperture = ideal_fill_factor(k, LensFootprint::AsAperture);
        row.ideal_inscribed = ideal_fill_factor(k, LensFootprint::InscribedCircle);
        rows.push_back(row);
    }
    return rows;
}

inline void write_packing_csv(std::ostream& os, const std::vector<PackingRow>& rows) {
    os << "# proxlith packing v1\n";
    os << "lattice,count,fill_aperture,fill_inscribed,ideal_aperture,ideal_inscribed\n";
    char buf[40];
    auto num = [&](double v) -> std::string {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return buf;
    };
    for (const PackingRow& r : rows)
        os << lattice_tag(r.lattice) << ',' << r.count << ',' << num(r.fill_aperture) << ','
           << num(r.fill_inscribed) << ',' << num(r.ideal_aperture) << ','
           << num(r.ideal_inscribed) << '\n';
}

}  // namespace proxlith

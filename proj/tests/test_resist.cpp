#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "proxlith/resist.hpp"
#include "proxlith/wave_optics.hpp"

using namespace proxlith;

namespace {

ResistRecipe contrast_recipe() {
    ResistRecipe r;
    r.thickness_um = 35.0;
    r.exposure_s = 16.0;
    r.dose_threshold = 40.0;
    r.dose_saturation = 200.0;
    r.gamma = 1.0;
    r.absorption = 0.0;
    return r;
}

}  // namespace

TEST_CASE("dose is intensity times power times exposure", "[resist]") {
    Grid2<double> inten(8, 8, 1.0, {0.0, 0.0}, 1.0);
    inten.at(3, 4) = 0.25;
    SourceSpec src = SourceSpec::monochromatic(0.4, 10.0);
    ResistRecipe r = contrast_recipe();
    Grid2<double> dose = accumulate_dose(inten, src, r);
    CHECK(dose.at(0, 0) == 160.0);  // 1.0 * 10 mW/cm2 * 16 s
    CHECK(dose.at(3, 4) == 40.0);
    CHECK(dose.nx == inten.nx);
    CHECK(dose.pitch == inten.pitch);
}

TEST_CASE("contrast curve shape", "[resist]") {
    ResistRecipe r = contrast_recipe();

    SECTION("below and at the threshold nothing stays") {
        CHECK(r.height_of(0.0) == 0.0);
        CHECK(r.height_of(40.0) == 0.0);
        CHECK(r.height_of(40.0 + 1e-9) < 1e-9);  // continuous knee
    }
    SECTION("at and beyond saturation the full thickness stays") {
        CHECK(r.height_of(200.0) == 35.0);
        CHECK(r.height_of(5000.0) == 35.0);
    }
    SECTION("linear at gamma 1") {
        CHECK(r.height_of(120.0) == Catch::Approx(17.5));
        CHECK(r.height_of(80.0) == Catch::Approx(35.0 * 0.25));
    }
    SECTION("gamma bends the curve") {
        r.gamma = 2.0;
        CHECK(r.height_of(120.0) == Catch::Approx(35.0 * 0.25));
        r.gamma = 0.5;
        CHECK(r.height_of(120.0) == Catch::Approx(35.0 * std::sqrt(0.5)));
    }
    SECTION("monotone in dose") {
        r.gamma = 0.75;
        double prev = -1.0;
        for (double d = 0.0; d < 400.0; d += 0.5) {
            double h = r.height_of(d);
            CHECK(h >= prev);
            prev = h;
        }
    }
}

TEST_CASE("absorption selects the depth-limited mode", "[resist]") {
    ResistRecipe r = contrast_recipe();
    r.absorption = 0.1;
    CHECK(r.depth_limited());

    // height = ln(D / threshold) / absorption, clipped at the thickness
    CHECK(r.height_of(40.0 * std::exp(1.0)) == Catch::Approx(10.0).epsilon(1e-12));
    CHECK(r.height_of(40.0 * std::exp(0.2)) == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(r.height_of(40.0 * std::exp(10.0)) == 35.0);
    CHECK(r.height_of(39.0) == 0.0);
}

TEST_CASE("develop maps doses pointwise", "[resist]") {
    ResistRecipe r = contrast_recipe();
    r.gamma = 0.8;
    Grid2<double> dose(16, 16, 0.5, {0.0, 0.0});
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 300.0);
    for (auto& v : dose.data) v = uni(rng);
    Grid2<double> h = develop(dose, r);
    for (std::size_t i = 0; i < h.data.size(); ++i)
        CHECK(h.data[i] == r.height_of(dose.data[i]));
}

TEST_CASE("dose blur conserves and smooths", "[resist]") {
    Grid2<double> dose(32, 32, 0.5, {0.0, 0.0});
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (auto& v : dose.data) v = uni(rng);

    SECTION("zero sigma is the identity") {
        Grid2<double> out = blur_dose(dose, 0.0);
        for (std::size_t i = 0; i < out.data.size(); ++i) CHECK(out.data[i] == dose.data[i]);
    }
    SECTION("a uniform field is unchanged") {
        Grid2<double> flat(32, 32, 0.5, {0.0, 0.0}, 3.25);
        Grid2<double> out = blur_dose(flat, 1.5);
        for (double v : out.data) CHECK(v == Catch::Approx(3.25).epsilon(1e-13));
    }
    SECTION("the mirrored boundary preserves the total dose") {
        double before = 0.0, after = 0.0;
        Grid2<double> out = blur_dose(dose, 2.0);
        for (double v : dose.data) before += v;
        for (double v : out.data) after += v;
        CHECK(after == Catch::Approx(before).epsilon(1e-10));
    }
    SECTION("blurring shrinks the dynamic range") {
        Grid2<double> out = blur_dose(dose, 2.0);
        auto range = [](const Grid2<double>& g) {
            double lo = g.data[0], hi = g.data[0];
            for (double v : g.data) { lo = std::min(lo, v); hi = std::max(hi, v); }
            return hi - lo;
        };
        CHECK(range(out) < 0.5 * range(dose));
    }
}

TEST_CASE("resist validation", "[resist]") {
    auto expect_throw = [](ResistRecipe r, const char* what) {
        CHECK_THROWS_WITH(r.validate(), Catch::Matchers::ContainsSubstring(what));
    };
    ResistRecipe ok = contrast_recipe();
    CHECK_NOTHROW(ok.validate());

    ResistRecipe r = ok;
    r.thickness_um = 0.0;
    expect_throw(r, "thickness");
    r = ok;
    r.exposure_s = -1.0;
    expect_throw(r, "exposure_time");
    r = ok;
    r.dose_threshold = 0.0;
    expect_throw(r, "dose_threshold");
    r = ok;
    r.dose_saturation = r.dose_threshold;
    expect_throw(r, "dose_saturation");
    r = ok;
    r.gamma = 0.0;
    expect_throw(r, "gamma");
    r = ok;
    r.absorption = -0.1;
    expect_throw(r, "absorption");
    r = ok;
    r.blur_sigma_um = -0.5;
    expect_throw(r, "blur_sigma");
}

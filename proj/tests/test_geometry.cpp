#include <catch2/catch_amalgamated.hpp>

#include "proxlith/geometry.hpp"

using namespace proxlith;

namespace {

Polygon unit_square(double side = 1.0, Vec2 lo = {0.0, 0.0}) {
    return {{lo.x, lo.y}, {lo.x + side, lo.y}, {lo.x + side, lo.y + side}, {lo.x, lo.y + side}};
}

}  // namespace

TEST_CASE("polygon area and centroid", "[geometry]") {
    CHECK(polygon_area(unit_square()) == Catch::Approx(1.0));
    CHECK(polygon_area(unit_square(3.0, {-1.0, 2.0})) == Catch::Approx(9.0));

    Polygon tri{{0.0, 0.0}, {4.0, 0.0}, {0.0, 3.0}};
    CHECK(polygon_area(tri) == Catch::Approx(6.0));
    Vec2 c = polygon_centroid(tri);
    CHECK(c.x == Catch::Approx(4.0 / 3.0));
    CHECK(c.y == Catch::Approx(1.0));

    // orientation does not matter for the unsigned area
    Polygon cw{{0.0, 0.0}, {0.0, 3.0}, {4.0, 0.0}};
    CHECK(polygon_area(cw) == Catch::Approx(6.0));
}

TEST_CASE("point in convex polygon with inset", "[geometry]") {
    Polygon sq = unit_square(2.0);
    CHECK(point_in_convex({1.0, 1.0}, sq));
    CHECK(point_in_convex({0.0, 1.0}, sq));
    CHECK_FALSE(point_in_convex({-0.01, 1.0}, sq));
    CHECK_FALSE(point_in_convex({2.01, 1.0}, sq));

    // positive inset shrinks the admissible area
    CHECK(point_in_convex({0.3, 1.0}, sq, 0.25));
    CHECK_FALSE(point_in_convex({0.2, 1.0}, sq, 0.25));
}

TEST_CASE("convex clipping areas", "[geometry]") {
    Polygon a = unit_square(2.0);
    Polygon b = unit_square(2.0, {1.0, 1.0});
    CHECK(convex_intersection_area(a, b) == Catch::Approx(1.0));

    // disjoint
    Polygon far = unit_square(1.0, {5.0, 5.0});
    CHECK(convex_intersection_area(a, far) == Catch::Approx(0.0).margin(1e-15));

    // containment
    Polygon inner = unit_square(1.0, {0.5, 0.5});
    CHECK(convex_intersection_area(a, inner) == Catch::Approx(1.0));

    // triangle clipped to a rect that cuts off one corner
    Polygon tri{{0.0, 0.0}, {4.0, 0.0}, {0.0, 4.0}};
    Rect r{{0.0, 0.0}, {2.0, 4.0}};
    // area left of x=2: full triangle 8 minus right corner (x>2): 2*2/2 = 2
    CHECK(polygon_area(clip_to_rect(tri, r)) == Catch::Approx(6.0));
}

TEST_CASE("circle rect overlap area", "[geometry]") {
    const double r = 1.7;
    const double full = M_PI * r * r;
    Rect big{{-10.0, -10.0}, {10.0, 10.0}};

    SECTION("circle fully inside") {
        CHECK(circle_rect_area({0.0, 0.0}, r, big) == Catch::Approx(full).epsilon(1e-9));
    }
    SECTION("center on an edge gives a half disc") {
        Rect right{{0.0, -10.0}, {10.0, 10.0}};
        CHECK(circle_rect_area({0.0, 0.0}, r, right) == Catch::Approx(0.5 * full).epsilon(1e-9));
    }
    SECTION("center on a corner gives a quarter disc") {
        Rect quad{{0.0, 0.0}, {10.0, 10.0}};
        CHECK(circle_rect_area({0.0, 0.0}, r, quad) == Catch::Approx(0.25 * full).epsilon(1e-9));
    }
    SECTION("disjoint") {
        Rect off{{5.0, 5.0}, {6.0, 6.0}};
        CHECK(circle_rect_area({0.0, 0.0}, r, off) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("rect inside the circle") {
        Rect small{{-0.5, -0.5}, {0.5, 0.5}};
        CHECK(circle_rect_area({0.0, 0.0}, r, small) == Catch::Approx(1.0).epsilon(1e-9));
    }
    SECTION("tangent circle contributes nothing") {
        Rect off{{r, -10.0}, {10.0, 10.0}};
        CHECK(circle_rect_area({0.0, 0.0}, r, off) == Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("rect helpers", "[geometry]") {
    Rect r{{1.0, 2.0}, {4.0, 6.0}};
    CHECK(r.width() == Catch::Approx(3.0));
    CHECK(r.height() == Catch::Approx(4.0));
    CHECK(r.area() == Catch::Approx(12.0));
    CHECK(r.center().x == Catch::Approx(2.5));
    CHECK(r.center().y == Catch::Approx(4.0));
    CHECK(r.contains({1.0, 2.0}));
    CHECK_FALSE(r.contains({0.99, 2.0}));
    CHECK_FALSE(r.degenerate());
    CHECK((Rect{{0.0, 0.0}, {0.0, 1.0}}.degenerate()));

    Rect g = r.grown(1.0);
    CHECK(g.lo.x == Catch::Approx(0.0));
    CHECK(g.hi.y == Catch::Approx(7.0));
    Rect s = r.grown(-1.0, -1.5);
    CHECK(s.width() == Catch::Approx(1.0));
    CHECK(s.height() == Catch::Approx(1.0));
}

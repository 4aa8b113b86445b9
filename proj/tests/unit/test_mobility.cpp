#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "mobsim/mobility.hpp"

using namespace mobsim;

namespace {

const Bounds kArea{0, 0, 10000, 10000};

std::vector<Vec2> walk(MobilityModel& m, std::int64_t minutes) {
    std::vector<Vec2> path;
    for (std::int64_t t = 0; t < minutes; ++t) path.push_back(m.advance(t));
    return path;
}

double step(const Vec2& a, const Vec2& b) { return dist(a, b); }

}  // namespace

TEST_CASE("commuter stays home before the earliest departure") {
    WpModel m(WpParams{}, kArea, Rng(5));
    const auto path = walk(m, 420);
    for (const auto& p : path) {
        CHECK(p.x == path[0].x);
        CHECK(p.y == path[0].y);
    }
}

TEST_CASE("commuter reaches the office and returns home daily") {
    WpParams params;
    WpModel m(WpParams{}, kArea, Rng(6));
    std::vector<Vec2> path = walk(m, 3 * 1440);
    const Vec2 home = path[0];
    // After the latest possible morning commute, settled at the office.
    const double worst = std::ceil(kArea.diagonal() / params.commute_speed_m_per_min);
    const auto at = [&](std::int64_t t) { return path[static_cast<std::size_t>(t)]; };
    const Vec2 office = at(static_cast<std::int64_t>(540 + worst));
    CHECK(step(home, office) > 1.0);  // distinct endpoints (a.s. for this seed)
    for (std::int64_t day = 0; day < 3; ++day) {
        const std::int64_t base = day * 1440;
        // Settled at the office before the evening window opens.
        CHECK(step(at(base + 959), office) < 1e-9);
        // Back home before midnight and until the next morning window.
        CHECK(step(at(base + 1439), home) < 1e-9);
        if (base + 1440 + 419 < static_cast<std::int64_t>(path.size()))
            CHECK(step(at(base + 1440 + 419), home) < 1e-9);
    }
}

TEST_CASE("commuter departure times are redrawn per day") {
    WpModel m(WpParams{}, kArea, Rng(44));
    const auto path = walk(m, 2 * 1440);
    const auto departed = [&](std::int64_t day, std::int64_t minute) {
        const auto base = static_cast<std::size_t>(day * 1440);
        return step(path[base + static_cast<std::size_t>(minute)], path[base]) > 1e-9;
    };
    std::int64_t first0 = 0, first1 = 0;
    for (std::int64_t t = 420; t <= 541; ++t)
        if (departed(0, t)) {
            first0 = t;
            break;
        }
    for (std::int64_t t = 420; t <= 541; ++t)
        if (departed(1, t)) {
            first1 = t;
            break;
        }
    CHECK(first0 >= 420);
    CHECK(first1 >= 420);
    CHECK(first0 != first1);  // a.s. for this seed
}

TEST_CASE("commuter speed never exceeds the commute speed") {
    WpModel m(WpParams{}, kArea, Rng(7));
    const auto path = walk(m, 2 * 1440);
    for (std::size_t i = 1; i < path.size(); ++i)
        REQUIRE(step(path[i - 1], path[i]) <= m.max_speed_m_per_min() + 1e-6);
}

TEST_CASE("commuter rejects schedules that cannot fit the area") {
    WpParams tight;
    tight.commute_speed_m_per_min = 1.0;  // 10km diagonal would take ~4 hours
    CHECK_THROWS(WpModel(tight, kArea, Rng(1)));
}

TEST_CASE("waypoint walker with zero move probability stays put") {
    RwpParams p;
    p.move_probability = 0.0;
    RwpModel m(p, kArea, Rng(8));
    const auto path = walk(m, 200);
    for (const auto& pos : path) CHECK(step(pos, path[0]) == 0.0);
}

TEST_CASE("waypoint walker stays inside bounds at bounded speed") {
    RwpParams p;
    p.move_probability = 1.0;  // move constantly to stress the clamps
    RwpModel m(p, kArea, Rng(9));
    const auto path = walk(m, 3000);
    for (std::size_t i = 0; i < path.size(); ++i) {
        CHECK(path[i].x >= 0.0);
        CHECK(path[i].x <= 10000.0);
        CHECK(path[i].y >= 0.0);
        CHECK(path[i].y <= 10000.0);
        if (i > 0) REQUIRE(step(path[i - 1], path[i]) <= p.speed_hi_m_per_min + 1e-6);
    }
}

TEST_CASE("waypoint walker eventually moves when probability is positive") {
    RwpParams p;
    p.move_probability = 0.05;
    RwpModel m(p, kArea, Rng(10));
    const auto path = walk(m, 2000);
    bool moved = false;
    for (std::size_t i = 1; i < path.size() && !moved; ++i)
        moved = step(path[i - 1], path[i]) > 0.0;
    CHECK(moved);
}

TEST_CASE("gauss-markov walker with full memory moves in a straight line") {
    GmParams p;
    p.alpha = 1.0;
    p.speed_stddev = 0.0;
    p.direction_stddev = 0.0;
    GmModel m(p, kArea, Rng(11));
    const auto path = walk(m, 30);
    bool bounced = false;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double d = step(path[i - 1], path[i]);
        if (path[i].x <= 0.0 || path[i].x >= 10000.0 || path[i].y <= 0.0 ||
            path[i].y >= 10000.0)
            bounced = true;
        if (!bounced) REQUIRE_THAT(d, Catch::Matchers::WithinAbs(80.0, 1e-9));
    }
    // Collinearity of the first few steps.
    const double dx1 = path[1].x - path[0].x, dy1 = path[1].y - path[0].y;
    const double dx2 = path[2].x - path[1].x, dy2 = path[2].y - path[1].y;
    CHECK_THAT(dx1 * dy2 - dy1 * dx2, Catch::Matchers::WithinAbs(0.0, 1e-6));
}

TEST_CASE("gauss-markov walker respects bounds and the speed cap") {
    GmModel m(GmParams{}, kArea, Rng(12));
    const auto path = walk(m, 5000);
    for (std::size_t i = 0; i < path.size(); ++i) {
        CHECK(path[i].x >= 0.0);
        CHECK(path[i].x <= 10000.0);
        CHECK(path[i].y >= 0.0);
        CHECK(path[i].y <= 10000.0);
        if (i > 0) REQUIRE(step(path[i - 1], path[i]) <= m.max_speed_m_per_min() + 1e-6);
    }
}

TEST_CASE("gauss-markov walker rejects invalid parameters") {
    GmParams bad;
    bad.alpha = 1.5;
    CHECK_THROWS(GmModel(bad, kArea, Rng(1)));
    GmParams slow;
    slow.max_speed_m_per_min = 10.0;  // below the mean
    CHECK_THROWS(GmModel(slow, kArea, Rng(1)));
}

TEST_CASE("models are deterministic given equal seeds") {
    for (int which = 0; which < 3; ++which) {
        std::unique_ptr<MobilityModel> a, b;
        if (which == 0) {
            a = std::make_unique<WpModel>(WpParams{}, kArea, Rng(21));
            b = std::make_unique<WpModel>(WpParams{}, kArea, Rng(21));
        } else if (which == 1) {
            a = std::make_unique<RwpModel>(RwpParams{}, kArea, Rng(21));
            b = std::make_unique<RwpModel>(RwpParams{}, kArea, Rng(21));
        } else {
            a = std::make_unique<GmModel>(GmParams{}, kArea, Rng(21));
            b = std::make_unique<GmModel>(GmParams{}, kArea, Rng(21));
        }
        for (std::int64_t t = 0; t < 500; ++t) {
            const Vec2 pa = a->advance(t), pb = b->advance(t);
            REQUIRE(pa.x == pb.x);
            REQUIRE(pa.y == pb.y);
        }
    }
}

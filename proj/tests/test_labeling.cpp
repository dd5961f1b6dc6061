#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "glovekit/labeling.hpp"
#include "glovekit/simgen.hpp"

using namespace glovekit;

namespace {

// Linear interpolation over the frame knots, clamped at the ends; used by the
// integration oracle below, independent of the library's integration code.
double interp(const std::vector<SensorFrame>& frames, int finger, double t) {
    if (t <= frames.front().t) return frames.front().pressure[static_cast<std::size_t>(finger)];
    if (t >= frames.back().t) return frames.back().pressure[static_cast<std::size_t>(finger)];
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].t >= t) {
            const double w = (t - frames[i - 1].t) / (frames[i].t - frames[i - 1].t);
            return (1.0 - w) * frames[i - 1].pressure[static_cast<std::size_t>(finger)] +
                   w * frames[i].pressure[static_cast<std::size_t>(finger)];
        }
    }
    return frames.back().pressure[static_cast<std::size_t>(finger)];
}

double riemann_midpoint(const std::vector<SensorFrame>& frames, int finger, double a, double b,
                        int steps) {
    const double h = (b - a) / steps;
    double sum = 0.0;
    for (int k = 0; k < steps; ++k) sum += interp(frames, finger, a + (k + 0.5) * h);
    return sum * h;
}

}  // namespace

TEST_SUITE("labeling") {

TEST_CASE("segment_notes pairs ons with offs in order") {
    std::vector<NoteEvent> events = {
        {0.5, NoteKind::On, 60, 80},  {0.72, NoteKind::Off, 60, 0},
        {0.8, NoteKind::On, 62, 90},  {1.02, NoteKind::Off, 62, 0},
        {1.1, NoteKind::On, 60, 70},  {1.32, NoteKind::Off, 60, 0},
    };
    const auto result = segment_notes(events);
    REQUIRE(result.segments.size() == 3);
    CHECK(result.unmatched_closed == 0);
    CHECK(result.orphan_offs == 0);
    CHECK(result.segments[0].white_index.value() == 35);
    CHECK(result.segments[0].velocity == 80);
    CHECK(result.segments[0].t_on == 0.5);
    CHECK(result.segments[0].t_off == 0.72);
    CHECK(result.segments[1].white_index.value() == 36);
    CHECK(result.segments[2].t_on == 1.1);
}

TEST_CASE("segment_notes closes trailing ons and skips orphan offs") {
    std::vector<NoteEvent> trailing = {
        {0.5, NoteKind::On, 60, 80},
        {0.72, NoteKind::Off, 60, 0},
        {0.8, NoteKind::On, 62, 90},  // never released
    };
    const auto r1 = segment_notes(trailing);
    REQUIRE(r1.segments.size() == 2);
    CHECK(r1.unmatched_closed == 1);
    CHECK(r1.segments[1].t_off == doctest::Approx(0.8 + 0.1));

    std::vector<NoteEvent> orphan = {
        {0.4, NoteKind::Off, 64, 0},  // nothing is open
        {0.5, NoteKind::On, 60, 80},
        {0.72, NoteKind::Off, 60, 0},
        {0.9, NoteKind::Off, 60, 0},  // already closed
    };
    const auto r2 = segment_notes(orphan);
    REQUIRE(r2.segments.size() == 1);
    CHECK(r2.orphan_offs == 2);

    CHECK(segment_notes({}).segments.empty());
}

TEST_CASE("segment_notes rejects overlap and black keys") {
    std::vector<NoteEvent> overlap = {
        {0.5, NoteKind::On, 60, 80},
        {0.6, NoteKind::On, 62, 80},  // second press before the first release
        {0.7, NoteKind::Off, 60, 0},
        {0.8, NoteKind::Off, 62, 0},
    };
    CHECK_THROWS_AS(segment_notes(overlap), OverlapError);

    std::vector<NoteEvent> black = {{0.5, NoteKind::On, 61, 80}, {0.7, NoteKind::Off, 61, 0}};
    CHECK_THROWS_AS(segment_notes(black), BlackKeyError);
}

TEST_CASE("trapezoidal integration agrees with a dense oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> gap(0.003, 0.015);
    std::uniform_real_distribution<double> level(0.0, 2.0);

    std::vector<SensorFrame> frames;
    double t = 0.0;
    while (t < 3.0) {
        SensorFrame f;
        f.t = t;
        for (int i = 0; i < 5; ++i) f.pressure[static_cast<std::size_t>(i)] = level(rng);
        frames.push_back(f);
        t += gap(rng);
    }
    SensorStream stream;
    stream.frames = frames;

    std::uniform_real_distribution<double> pick_a(0.1, 2.5);
    std::uniform_real_distribution<double> pick_len(0.05, 0.4);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = pick_a(rng);
        const double b = a + pick_len(rng);
        NoteSegment seg;
        seg.t_on = a;
        seg.t_off = b;
        seg.white_index = WhiteIndex(35);

        // The assigned finger maximizes the integral; verify against midpoint
        // sums on a grid fine enough to make kink errors negligible.
        double best = -1.0;
        int best_finger = 0;
        double second = -1.0;
        for (int i = 0; i < 5; ++i) {
            const double oracle = riemann_midpoint(frames, i, a, b, 20000);
            if (oracle > best) {
                second = best;
                best = oracle;
                best_finger = i;
            } else if (oracle > second) {
                second = oracle;
            }
        }
        if (best - second < 1e-6) continue;  // too close for the oracle's resolution
        CHECK(assign_finger(stream, seg).value() == best_finger + 1);
    }
}

TEST_CASE("assign_finger breaks exact ties toward the thumb") {
    SensorStream stream;
    for (int i = 0; i < 30; ++i) {
        SensorFrame f;
        f.t = 0.01 * i;
        f.pressure[1] = 1.0;  // index and middle finger identical
        f.pressure[2] = 1.0;
        stream.frames.push_back(f);
    }
    NoteSegment seg;
    seg.t_on = 0.05;
    seg.t_off = 0.2;
    CHECK(assign_finger(stream, seg).value() == 2);

    // All-zero pressures tie across all five fingers -> thumb.
    SensorStream flat = stream;
    for (auto& f : flat.frames) f.pressure = {};
    CHECK(assign_finger(flat, seg).value() == 1);
}

TEST_CASE("assign_finger needs overlap with the stream") {
    SensorStream stream;
    for (int i = 0; i < 10; ++i) {
        SensorFrame f;
        f.t = 0.01 * i;
        stream.frames.push_back(f);
    }
    NoteSegment before;
    before.t_on = -1.0;
    before.t_off = -0.5;
    CHECK_THROWS_AS(assign_finger(stream, before), EmptyWindowError);

    NoteSegment after;
    after.t_on = 5.0;
    after.t_off = 5.5;
    CHECK_THROWS_AS(assign_finger(stream, after), EmptyWindowError);
    CHECK_THROWS_AS(assign_finger(SensorStream{}, before), EmptyWindowError);
}

TEST_CASE("thumb-under rule is the sign of the finger-note product") {
    const WhiteIndex n0(35);
    // Crossing up: fingers descend while notes ascend.
    CHECK(label_thumb_under(FingerId(3), FingerId(1), n0, WhiteIndex(36)));
    // Crossing down: fingers ascend while notes descend.
    CHECK(label_thumb_under(FingerId(1), FingerId(3), n0, WhiteIndex(34)));
    // Parallel motion is not a crossing.
    CHECK_FALSE(label_thumb_under(FingerId(1), FingerId(2), n0, WhiteIndex(36)));
    CHECK_FALSE(label_thumb_under(FingerId(4), FingerId(2), n0, WhiteIndex(33)));
    // Zero component on either axis is not a crossing.
    CHECK_FALSE(label_thumb_under(FingerId(2), FingerId(2), n0, WhiteIndex(37)));
    CHECK_FALSE(label_thumb_under(FingerId(2), FingerId(4), n0, WhiteIndex(35)));
    CHECK_FALSE(label_thumb_under(FingerId(2), FingerId(2), n0, n0));
}

TEST_CASE("build_dataset labels a clean rendered session") {
    // Two-octave scale: the fingering carries crossings in both directions.
    const Score score = make_scale_score(2, 40, 5);
    Session session = render_sensors(score, NoiseParams{});
    session.sensors = normalize_flex(session.sensors);

    const int n = 10;
    const double dt = 1.0 / 150.0;
    const auto rows = build_dataset(session, n, dt);
    REQUIRE(rows.size() == score.entries.size());

    const auto tu = score_tu_flags(score);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].finger == score.entries[i].finger);
        CHECK(rows[i].white_index == score.entries[i].white_index);
        CHECK(rows[i].tu == tu[i]);
        CHECK(rows[i].t_on == doctest::Approx(score.entries[i].t_on));
        REQUIRE(static_cast<int>(rows[i].flex_window.size()) == n);
        // The window is exactly the resampled normalized thumb flex at t_on.
        const auto expect = resample_window(session.sensors, ChannelRef::thumb_flex(),
                                            rows[i].t_on, n, dt);
        CHECK(rows[i].flex_window == expect);
    }
    CHECK_FALSE(rows.front().tu);
}

TEST_CASE("dataset csv carries one row per event") {
    const Score score = generate_score(Tier::Cdefg, 3, 2);
    Session session = render_sensors(score, NoiseParams{});
    session.sensors = normalize_flex(session.sensors);
    const auto rows = build_dataset(session, 4, 1.0 / 150.0);

    const std::string csv = serialize_dataset_csv(rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t_on,finger,white_index,tu,w1,w2,w3,w4");
    int count = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) count++;
    }
    CHECK(count == 3);
}

}  // TEST_SUITE

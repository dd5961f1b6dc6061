// Acceptance gate: nine end-to-end checks over the whole toolkit, one
// pass/fail line each. Thresholds and budgets are pinned here on purpose;
// loosening them is a behavior change, not a test fix.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "glovekit/decode.hpp"
#include "glovekit/eval.hpp"
#include "json.hpp"

using namespace glovekit;
namespace stdfs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 3) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << v;
    return out.str();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string read_file(const stdfs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Random labeled sequences shared by the recount and normalization checks.
std::vector<std::vector<LabeledEvent>> random_sequences(std::mt19937_64& rng, int n_seq,
                                                        int max_len) {
    std::uniform_int_distribution<int> len(2, max_len);
    std::uniform_int_distribution<int> finger(1, 5);
    std::uniform_int_distribution<int> step(-16, 16);
    std::uniform_int_distribution<int> flip(0, 1);
    std::vector<std::vector<LabeledEvent>> seqs;
    for (int s = 0; s < n_seq; ++s) {
        std::vector<LabeledEvent> seq;
        int note = 37;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) {
            note = std::clamp(note + step(rng), 0, 74);
            LabeledEvent e;
            e.finger = FingerId(finger(rng));
            e.white_index = WhiteIndex(note);
            e.tu = flip(rng) == 1;
            seq.push_back(e);
        }
        seqs.push_back(seq);
    }
    return seqs;
}

// ---------------------------------------------------------------------------
// 1. Oracle closure: noise-free renders label back to the exact script.

Outcome oracle_closure() {
    constexpr double kBudgetSeconds = 30.0;
    constexpr int kNotes = 60;
    const auto start = Clock::now();

    int notes_checked = 0;
    std::string first_bad;
    for (const Tier tier : all_tiers()) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const Score score = generate_score(tier, kNotes, seed);
            const Session session = render_sensors(score, NoiseParams{});
            const auto events = build_dataset(session, 10, 1.0 / kDefaultSampleRate);
            const auto tu = score_tu_flags(score);

            bool ok = events.size() == score.entries.size();
            for (std::size_t i = 0; ok && i < events.size(); ++i) {
                ok = events[i].finger.value() == score.entries[i].finger.value() &&
                     events[i].white_index.value() == score.entries[i].white_index.value() &&
                     events[i].tu == tu[i];
            }
            notes_checked += kNotes;
            if (!ok && first_bad.empty())
                first_bad = to_string(tier) + " seed " + std::to_string(seed);
        }
    }

    const double elapsed = seconds_since(start);
    if (!first_bad.empty())
        return {false, "label mismatch, first at " + first_bad};
    if (elapsed >= kBudgetSeconds)
        return {false, "took " + fmt(elapsed, 1) + " s (budget " + fmt(kBudgetSeconds, 0) + " s)"};
    return {true, std::to_string(notes_checked) +
                      " scripted notes across 7 tiers x 10 seeds recovered exactly in " +
                      fmt(elapsed, 1) + " s"};
}

// ---------------------------------------------------------------------------
// 2. Counting equivalence: the fitted tables equal a brute-force recount.

Outcome counting_recount() {
    constexpr int kDatasets = 100;
    std::mt19937_64 rng(20260814);
    std::uniform_int_distribution<int> n_seq(1, 5);
    std::uniform_int_distribution<int> lo(8, 15);

    int bad = 0;
    for (int trial = 0; trial < kDatasets; ++trial) {
        const auto space = static_cast<FeatureSpace>(trial % 3);
        const int support_min = -lo(rng);
        const int support_max = lo(rng);
        const auto seqs = random_sequences(rng, n_seq(rng), 60);

        const IntervalModel model = fit_interval_model(seqs, space, support_min, support_max);

        std::map<ContextKey, std::map<int, std::int64_t>> expect;
        std::int64_t dropped = 0;
        for (const auto& seq : seqs) {
            for (std::size_t i = 1; i < seq.size(); ++i) {
                const int dn = seq[i].white_index - seq[i - 1].white_index;
                if (dn < support_min || dn > support_max) {
                    ++dropped;
                    continue;
                }
                ++expect[make_context_key(space, seq[i - 1].finger, seq[i].finger, seq[i].tu)][dn];
            }
        }
        if (model.counts != expect || model.dropped != dropped) ++bad;
    }

    if (bad > 0) return {false, std::to_string(bad) + " of 100 datasets mismatched the recount"};
    return {true, "100 random datasets recounted exactly (all feature spaces, varied supports)"};
}

// ---------------------------------------------------------------------------
// 3. Gradient check: analytic gradient vs central finite differences.

Outcome gradient_check() {
    constexpr double kH = 1e-6;
    constexpr double kTol = 1e-4;
    constexpr std::array<double, 3> kL2 = {0.0, 1e-3, 1.0};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> dims(5, 12);
    std::uniform_int_distribution<int> rows(10, 40);
    std::uniform_int_distribution<int> flip(0, 1);

    double worst = 0.0;
    for (int point = 0; point < 20; ++point) {
        const int d = dims(rng);
        const int m = rows(rng);
        const double l2 = kL2[static_cast<std::size_t>(point % 3)];

        std::vector<std::vector<double>> x;
        std::vector<int> y;
        for (int r = 0; r < m; ++r) {
            std::vector<double> row;
            for (int c = 0; c + 1 < d; ++c) row.push_back(2.0 * unit(rng));
            row.push_back(1.0);
            x.push_back(std::move(row));
            y.push_back(flip(rng));
        }
        std::vector<double> w;
        for (int c = 0; c < d; ++c) w.push_back(unit(rng));

        const auto grad = logistic_nll_gradient(w, x, y, l2);
        for (int c = 0; c < d; ++c) {
            auto wp = w;
            auto wm = w;
            wp[static_cast<std::size_t>(c)] += kH;
            wm[static_cast<std::size_t>(c)] -= kH;
            const double fd = (logistic_nll(wp, x, y, l2) - logistic_nll(wm, x, y, l2)) / (2 * kH);
            const double rel = std::abs(grad[static_cast<std::size_t>(c)] - fd) /
                               std::max(1.0, std::abs(fd));
            worst = std::max(worst, rel);
        }
    }

    std::ostringstream detail;
    detail << "max relative error " << worst << " at 20 random points (tolerance 1e-4)";
    return {worst < kTol, detail.str()};
}

// ---------------------------------------------------------------------------
// 4. Thumb-under learning: clean data separates, noisy data lands mid-band.

std::vector<std::vector<LabeledEvent>> scale_block(const NoiseParams& base, std::uint64_t seed0,
                                                   int begin, int end) {
    std::vector<std::vector<LabeledEvent>> out;
    for (int i = begin; i < end; ++i) {
        const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
        NoiseParams np = base;
        np.seed = seed;
        Session session = render_sensors(make_scale_score(2, 150, seed), np);
        session.sensors = normalize_flex(session.sensors);
        out.push_back(build_dataset(session, 10, 1.0 / kDefaultSampleRate));
    }
    return out;
}

// Per-finger (hits, total) over every event of a trained finger.
std::map<int, std::pair<int, int>> tu_tally(const TUClassifier& tc,
                                            const std::vector<std::vector<LabeledEvent>>& seqs) {
    std::map<int, std::pair<int, int>> tally;
    for (const auto& seq : seqs) {
        for (const auto& e : seq) {
            if (!tc.trained[static_cast<std::size_t>(e.finger.value() - 1)]) continue;
            auto& [hits, total] = tally[e.finger.value()];
            ++total;
            if (predict_tu(tc, e.finger, e.flex_window).tu == e.tu) ++hits;
        }
    }
    return tally;
}

Outcome tu_learning() {
    constexpr double kCleanTrainMin = 0.99;
    constexpr double kCleanHeldMin = 0.95;
    constexpr double kNoisyLo = 0.80;
    constexpr double kNoisyHi = 0.97;

    // Clean leg: 8 two-octave scale sessions, first 6 train, last 2 held out.
    const auto clean_train = scale_block(NoiseParams{}, 201, 0, 6);
    const auto clean_held = scale_block(NoiseParams{}, 201, 6, 8);
    const TUClassifier tc_clean = fit_tu_classifier(clean_train, 10);

    const auto train_tally = tu_tally(tc_clean, clean_train);
    const auto held_tally = tu_tally(tc_clean, clean_held);
    if (train_tally.size() < 2) return {false, "fewer than two fingers trained on clean scales"};
    for (const auto& [finger, hits] : train_tally) {
        const double acc = static_cast<double>(hits.first) / hits.second;
        if (acc < kCleanTrainMin)
            return {false, "clean train accuracy " + fmt(acc) + " on finger " +
                               std::to_string(finger) + " (need >= 0.99)"};
    }
    for (const auto& [finger, hits] : held_tally) {
        const double acc = static_cast<double>(hits.first) / hits.second;
        if (acc < kCleanHeldMin)
            return {false, "clean held-out accuracy " + fmt(acc) + " on finger " +
                               std::to_string(finger) + " (need >= 0.95)"};
    }

    // Noisy leg: flex noise at 0.3 x dip amplitude, held-out average mid-band.
    NoiseParams flex_noise;
    flex_noise.flex_sigma = 0.3;
    const auto noisy_train = scale_block(flex_noise, 301, 0, 6);
    const auto noisy_held = scale_block(flex_noise, 301, 6, 8);
    const TUClassifier tc_noisy = fit_tu_classifier(noisy_train, 10);

    double sum = 0.0;
    int fingers = 0;
    for (const auto& [finger, hits] : tu_tally(tc_noisy, noisy_held)) {
        sum += static_cast<double>(hits.first) / hits.second;
        ++fingers;
    }
    if (fingers == 0) return {false, "no fingers trained on noisy scales"};
    const double noisy_avg = sum / fingers;
    if (noisy_avg < kNoisyLo || noisy_avg > kNoisyHi)
        return {false, "noisy held-out average " + fmt(noisy_avg) + " outside [0.80, 0.97]"};

    return {true, "clean per-finger train >= 0.99 and held-out >= 0.95 (fingers " +
                      std::to_string(train_tally.size()) + "); noisy held-out average " +
                      fmt(noisy_avg) + " within [0.80, 0.97]"};
}

// ---------------------------------------------------------------------------
// 5. Benchmark ordering: per-tier runs keep the two monotone trends.

Outcome benchmark_ordering() {
    constexpr double kPairSlack = 0.02;
    constexpr double kTierGap = 0.15;
    constexpr double kBudgetSeconds = 120.0;
    const auto start = Clock::now();

    std::map<std::string, std::map<std::string, double>> acc;  // tier -> space -> accuracy
    for (const Tier tier : all_tiers()) {
        PipelineConfig cfg;
        cfg.tiers = {tier};
        cfg.notes_per_tier = 100;
        cfg.seeds = {11, 12, 13, 14, 15};

        const stdfs::path dir =
            stdfs::temp_directory_path() / ("glovekit_acceptance_bench_" + to_string(tier));
        stdfs::remove_all(dir);
        run_pipeline(cfg, dir);
        const auto report = nlohmann::json::parse(read_file(dir / "report.json"));
        for (const std::string space : {"delta_f", "pair", "pair_tu"})
            acc[to_string(tier)][space] =
                report.at("results").at(space).at("per_tier").at(to_string(tier)).get<double>();
        stdfs::remove_all(dir);
    }

    // (a) Feature-space ordering on every tier whose script contains
    // thumb-unders; the flat and clamped tiers have none to resolve.
    for (const std::string tier : {"scales", "scales_rand", "menuet", "improv_pred"}) {
        const double d = acc[tier]["delta_f"];
        const double p = acc[tier]["pair"];
        const double pt = acc[tier]["pair_tu"];
        if (pt < p)
            return {false, tier + ": pair_tu " + fmt(pt) + " < pair " + fmt(p)};
        if (p < d - kPairSlack)
            return {false, tier + ": pair " + fmt(p) + " < delta_f " + fmt(d) + " - 0.02"};
    }

    // (b) Tier ordering: the fixed position beats the wide clamped walk.
    const double easy = acc["cdefg"]["pair_tu"];
    const double hard = acc["improv_nonpred"]["pair_tu"];
    if (easy < hard + kTierGap)
        return {false, "cdefg " + fmt(easy) + " < improv_nonpred " + fmt(hard) + " + 0.15"};

    const double elapsed = seconds_since(start);
    if (elapsed >= kBudgetSeconds)
        return {false, "took " + fmt(elapsed, 1) + " s (budget 120 s)"};
    return {true, "pair_tu >= pair >= delta_f - 0.02 on all thumb-under tiers; cdefg " +
                      fmt(easy) + " vs improv_nonpred " + fmt(hard) + " (gap >= 0.15); " +
                      fmt(elapsed, 1) + " s"};
}

// ---------------------------------------------------------------------------
// 6. Scale decode: clean two-octave scales stream back at >= 0.95 transitions.

Outcome scale_decode() {
    constexpr double kMinAccuracy = 0.95;

    std::vector<std::vector<LabeledEvent>> train;
    for (std::uint64_t seed = 401; seed <= 406; ++seed) {
        NoiseParams np;
        np.seed = seed;
        Session session = render_sensors(make_scale_score(2, 150, seed), np);
        session.sensors = normalize_flex(session.sensors);
        train.push_back(build_dataset(session, 10, 1.0 / kDefaultSampleRate));
    }
    const IntervalModel im = fit_interval_model(train, FeatureSpace::PairTu);
    const TUClassifier tc = fit_tu_classifier(train, 10);

    const Score score = make_scale_score(2, 100, 409);
    Session session = render_sensors(score, NoiseParams{});
    session.sensors = normalize_flex(session.sensors);
    const auto notes =
        decode_performance(session.sensors, im, tc, DecoderConfig{}, 10, 1.0 / kDefaultSampleRate);

    if (notes.size() != score.entries.size())
        return {false, "decoded " + std::to_string(notes.size()) + " notes, scripted " +
                           std::to_string(score.entries.size())};

    int correct = 0;
    for (std::size_t i = 1; i < notes.size(); ++i) {
        const int predicted = notes[i].white_index - notes[i - 1].white_index;
        const int truth = score.entries[i].white_index - score.entries[i - 1].white_index;
        if (predicted == truth) ++correct;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(notes.size() - 1);
    return {acc >= kMinAccuracy,
            "transition accuracy " + fmt(acc) + " over " + std::to_string(notes.size() - 1) +
                " transitions (need >= 0.95)"};
}

// ---------------------------------------------------------------------------
// 7. MIDI codec: exhaustive wire round trip.

Outcome midi_codec() {
    constexpr double kBudgetSeconds = 5.0;
    const auto start = Clock::now();

    long total = 0;
    long bad = 0;
    for (const NoteKind kind : {NoteKind::On, NoteKind::Off}) {
        for (int note = 0; note <= 127; ++note) {
            for (int velocity = 1; velocity <= 127; ++velocity) {
                for (int channel = 0; channel <= 15; ++channel) {
                    const NoteEvent e{0.25, kind, note, velocity};
                    const MidiMessage m = encode_midi_message(e, channel);
                    const int expected_status = (kind == NoteKind::On ? 0x90 : 0x80) | channel;
                    const NoteEvent d = decode_midi_message(m, 0.25);
                    ++total;
                    if (m.status != expected_status || m.data1 != note || m.data2 != velocity ||
                        d != e)
                        ++bad;
                }
            }
        }
    }

    // White-key arithmetic rides the same wire; the ordinals must survive too.
    for (int w = 0; w <= 74; ++w) {
        ++total;
        if (midi_to_white_index(white_index_to_midi(WhiteIndex(w))).value() != w) ++bad;
    }
    // Wire rule, not an inverse: a velocity-0 note-on decodes as a note-off.
    ++total;
    if (decode_midi_message({0x95, 60, 0}, 0.0).kind != NoteKind::Off) ++bad;

    const double elapsed = seconds_since(start);
    if (bad > 0) return {false, std::to_string(bad) + " of " + std::to_string(total) + " mismatched"};
    if (elapsed >= kBudgetSeconds)
        return {false, "took " + fmt(elapsed, 1) + " s (budget 5 s)"};
    return {true, std::to_string(total) + " round trips exact in " + fmt(elapsed, 1) + " s"};
}

// ---------------------------------------------------------------------------
// 8. Determinism: identical pipeline config, byte-identical artifacts.

Outcome pipeline_determinism() {
    const PipelineConfig cfg;  // the default benchmark: all tiers, seed 1
    const stdfs::path dir_a = stdfs::temp_directory_path() / "glovekit_acceptance_det_a";
    const stdfs::path dir_b = stdfs::temp_directory_path() / "glovekit_acceptance_det_b";
    stdfs::remove_all(dir_a);
    stdfs::remove_all(dir_b);
    run_pipeline(cfg, dir_a);
    run_pipeline(cfg, dir_b);

    const std::vector<std::string> artifacts = {
        "report.json",          "accuracy_table.csv",    "confusion_delta_f.csv",
        "confusion_pair.csv",   "confusion_pair_tu.csv", "transition_delta_f.csv",
        "transition_pair.csv",  "transition_pair_tu.csv", "model_delta_f.json",
        "model_pair.json",      "model_pair_tu.json",
    };
    for (const auto& name : artifacts) {
        if (!stdfs::exists(dir_a / name) || !stdfs::exists(dir_b / name))
            return {false, "missing artifact " + name};
        if (read_file(dir_a / name) != read_file(dir_b / name))
            return {false, name + " differs between runs"};
    }
    stdfs::remove_all(dir_a);
    stdfs::remove_all(dir_b);
    return {true, std::to_string(artifacts.size()) + " artifacts byte-identical across two runs"};
}

// ---------------------------------------------------------------------------
// 9. Normalization: every emitted probability row sums to one.

double quoted_row_sum(const std::string& line) {
    const std::size_t end = line.find_last_of('"');
    std::istringstream cells(line.substr(end + 2));
    std::string cell;
    double sum = 0.0;
    while (std::getline(cells, cell, ',')) sum += std::stod(cell);
    return sum;
}

Outcome distribution_normalization() {
    constexpr double kTol = 1e-9;
    std::mt19937_64 rng(99);
    double worst = 0.0;
    long rows = 0;

    const auto seqs = random_sequences(rng, 6, 80);
    for (const auto space : {FeatureSpace::DeltaF, FeatureSpace::Pair, FeatureSpace::PairTu}) {
        for (const double alpha : {0.0, 0.5, 1.0}) {
            const IntervalModel model = fit_interval_model(seqs, space, -12, 12, alpha);

            // Smoothed distributions over every context, seen or not.
            for (int fp = 1; fp <= kNumFingers; ++fp) {
                for (int fc = 1; fc <= kNumFingers; ++fc) {
                    for (const bool tu : {false, true}) {
                        double sum = 0.0;
                        for (const double p :
                             interval_distribution(model, FingerId(fp), FingerId(fc), tu))
                            sum += p;
                        worst = std::max(worst, std::abs(sum - 1.0));
                        ++rows;
                    }
                }
            }

            // The emitted transition table, row by row.
            std::istringstream lines(transition_csv(model));
            std::string line;
            std::getline(lines, line);  // header
            while (std::getline(lines, line)) {
                worst = std::max(worst, std::abs(quoted_row_sum(line) - 1.0));
                ++rows;
            }
        }
    }

    // Confusion rows normalize to one where observed and to zero elsewhere.
    const IntervalModel im = fit_interval_model(seqs, FeatureSpace::Pair);
    const AccuracyReport report =
        evaluate(im, TUClassifier{}, {{"a", seqs[0]}, {"b", seqs[1]}}, /*oracle_tu=*/true);
    std::istringstream lines(confusion_csv(report, -12, 12));
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');  // true-dn label
        double sum = 0.0;
        while (std::getline(cells, cell, ',')) sum += std::stod(cell);
        if (sum != 0.0) {
            worst = std::max(worst, std::abs(sum - 1.0));
            ++rows;
        }
    }

    std::ostringstream detail;
    detail << rows << " probability rows, max |sum - 1| = " << worst << " (tolerance 1e-9)";
    return {worst < kTol, detail.str()};
}

}  // namespace

int main() {
    struct Check {
        int number;
        const char* name;
        Outcome (*run)();
    };
    const std::vector<Check> checks = {
        {1, "oracle closure", oracle_closure},
        {2, "count-model recount", counting_recount},
        {3, "logistic gradient", gradient_check},
        {4, "thumb-under learning", tu_learning},
        {5, "benchmark ordering", benchmark_ordering},
        {6, "scale decoding", scale_decode},
        {7, "midi codec", midi_codec},
        {8, "pipeline determinism", pipeline_determinism},
        {9, "distribution normalization", distribution_normalization},
    };

    int failures = 0;
    for (const Check& check : checks) {
        Outcome outcome;
        try {
            outcome = check.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("unexpected exception: ") + e.what()};
        }
        std::printf("[%s] criterion %d (%s): %s\n", outcome.pass ? "PASS" : "FAIL", check.number,
                    check.name, outcome.detail.c_str());
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

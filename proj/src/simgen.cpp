#include "glovekit/simgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "glovekit/decode_config.hpp"

namespace glovekit {

std::string to_string(Tier tier) {
    switch (tier) {
        case Tier::Cdefg: return "cdefg";
        case Tier::CdefgRand: return "cdefg_rand";
        case Tier::Scales: return "scales";
        case Tier::ScalesRand: return "scales_rand";
        case Tier::Menuet: return "menuet";
        case Tier::ImprovPred: return "improv_pred";
        case Tier::ImprovNonpred: return "improv_nonpred";
    }
    throw UnknownTierError("bad tier value");
}

Tier tier_from_string(const std::string& s) {
    for (Tier tier : all_tiers())
        if (to_string(tier) == s) return tier;
    throw UnknownTierError("unknown tier '" + s + "'");
}

const std::vector<Tier>& all_tiers() {
    static const std::vector<Tier> tiers = {
        Tier::Cdefg,      Tier::CdefgRand,  Tier::Scales,        Tier::ScalesRand,
        Tier::Menuet,     Tier::ImprovPred, Tier::ImprovNonpred,
    };
    return tiers;
}

std::vector<bool> score_tu_flags(const Score& score) {
    std::vector<bool> flags(score.entries.size(), false);
    for (std::size_t i = 1; i < score.entries.size(); ++i) {
        const int df = score.entries[i].finger.value() - score.entries[i - 1].finger.value();
        const int dn = score.entries[i].white_index - score.entries[i - 1].white_index;
        flags[i] = df * dn < 0;
    }
    return flags;
}

namespace {

// Middle C (MIDI 60) in white-key indices; scripts stay in a band around it.
constexpr int kMiddleC = 35;

// One octave of C major, up and back down, with the canonical crossing
// fingering. The wrap restrikes the bottom C with the thumb.
constexpr std::array<int, 15> kScaleOffsets = {0, 1, 2, 3, 4, 5, 6, 7, 6, 5, 4, 3, 2, 1, 0};
constexpr std::array<int, 15> kScaleFingers = {1, 2, 3, 1, 2, 3, 4, 5, 4, 3, 2, 1, 3, 2, 1};

// Minuet in G (BWV Anh. 114) melody, transposed to C major, with a
// hand-assigned right-hand fingering. Loops when more notes are requested.
constexpr std::array<int, 65> kMenuetNotes = {
    39, 35, 36, 37, 38,  39, 35, 35,  40, 38, 39, 40, 41,  42, 35, 35,
    38, 39, 38, 37, 36,  37, 38, 37, 36, 35,  34, 35, 36, 37, 35,  37, 36,
    39, 35, 36, 37, 38,  39, 35, 35,  40, 38, 39, 40, 41,  42, 35, 35,
    38, 39, 38, 37, 36,  37, 38, 37, 36, 35,  36, 37, 36, 35, 34,  35,
};
constexpr std::array<int, 65> kMenuetFingers = {
    5, 1, 2, 3, 1,  2, 1, 1,  5, 3, 4, 5, 5,  5, 1, 1,
    4, 5, 4, 3, 2,  3, 4, 3, 2, 1,  3, 4, 5, 5, 3,  5, 4,
    5, 1, 2, 3, 4,  5, 1, 1,  5, 3, 4, 5, 5,  5, 1, 1,
    4, 5, 4, 3, 2,  3, 4, 3, 2, 1,  2, 3, 2, 1, 3,  4,
};

Score assemble(Tier tier, const std::vector<std::pair<int, int>>& note_finger,
               std::mt19937_64& rng) {
    std::uniform_int_distribution<int> vel(60, 110);
    Score score;
    score.tier = tier;
    score.entries.reserve(note_finger.size());
    for (std::size_t i = 0; i < note_finger.size(); ++i) {
        score.entries.push_back({WhiteIndex(note_finger[i].first), FingerId(note_finger[i].second),
                                 kScoreStart + kNoteSpacing * static_cast<double>(i),
                                 kNoteDuration, vel(rng)});
    }
    return score;
}

std::vector<std::pair<int, int>> improv_walk(std::mt19937_64& rng, int num_notes, int max_step,
                                             int band_lo, int band_hi, bool crossings) {
    std::uniform_int_distribution<int> start_note(kMiddleC - 2, kMiddleC + 6);
    std::uniform_int_distribution<int> start_finger(1, 5);
    std::uniform_int_distribution<int> step(-max_step, max_step);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    int note = start_note(rng);
    int finger = start_finger(rng);
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(num_notes));
    out.emplace_back(note, finger);

    while (static_cast<int>(out.size()) < num_notes) {
        int dn = step(rng);
        if (note + dn < band_lo || note + dn > band_hi) dn = -dn;  // reflect at the band edge

        // Thumb crossings continue small steps past the hand's reach; the
        // one-to-one "diagonal" move covers everything inside the reach.
        int cross = 0;
        if (crossings) {
            if (dn == 1 && finger == 3) cross = 1;
            else if (dn == 2 && finger == 4) cross = 1;
            else if (dn == -1 && finger == 1) cross = 3;
            else if (dn == -2 && finger == 1) cross = 4;
        }
        const int diagonal = finger + dn;
        const bool diagonal_ok = diagonal >= 1 && diagonal <= 5;
        int next;
        if (cross != 0 && coin(rng) < 0.4) next = cross;
        else if (diagonal_ok) next = diagonal;
        else if (crossings) continue;  // out of reach, crossing declined: new step
        else next = std::clamp(diagonal, 1, 5);

        note += dn;
        finger = next;
        out.emplace_back(note, finger);
    }
    return out;
}

}  // namespace

Score make_scale_score(int octaves, int num_notes, std::uint64_t seed) {
    if (octaves < 1) throw RangeError("octaves must be >= 1");
    if (num_notes < 2) throw RangeError("num_notes must be >= 2");

    // Ascend octave by octave with 1,2,3,1,2,3,4, top note under 5, then the
    // mirror descent; the wrap restrikes the bottom note with the thumb.
    std::vector<std::pair<int, int>> cycle;
    constexpr std::array<int, 7> up_fingers = {1, 2, 3, 1, 2, 3, 4};
    constexpr std::array<int, 7> down_fingers = {4, 3, 2, 1, 3, 2, 1};
    for (int oct = 0; oct < octaves; ++oct)
        for (int k = 0; k < 7; ++k)
            cycle.emplace_back(kMiddleC + 7 * oct + k, up_fingers[static_cast<std::size_t>(k)]);
    cycle.emplace_back(kMiddleC + 7 * octaves, 5);
    for (int oct = octaves - 1; oct >= 0; --oct)
        for (int k = 0; k < 7; ++k)
            cycle.emplace_back(kMiddleC + 7 * oct + (6 - k),
                               down_fingers[static_cast<std::size_t>(k)]);

    std::mt19937_64 rng(seed);
    std::vector<std::pair<int, int>> nf;
    nf.reserve(static_cast<std::size_t>(num_notes));
    for (int i = 0; i < num_notes; ++i) nf.push_back(cycle[static_cast<std::size_t>(i) % cycle.size()]);
    return assemble(Tier::Scales, nf, rng);
}

Score generate_score(Tier tier, int num_notes, std::uint64_t seed) {
    if (num_notes < 2) throw RangeError("num_notes must be >= 2");
    std::mt19937_64 rng(seed);
    std::vector<std::pair<int, int>> nf;
    nf.reserve(static_cast<std::size_t>(num_notes));

    switch (tier) {
        case Tier::Cdefg: {
            // C D E F G F E D, fingers = note rank, repeated.
            constexpr std::array<int, 8> offsets = {0, 1, 2, 3, 4, 3, 2, 1};
            for (int i = 0; i < num_notes; ++i) {
                const int off = offsets[static_cast<std::size_t>(i % 8)];
                nf.emplace_back(kMiddleC + off, off + 1);
            }
            break;
        }
        case Tier::CdefgRand: {
            std::uniform_int_distribution<int> pick(0, 4);
            for (int i = 0; i < num_notes; ++i) {
                const int k = pick(rng);
                nf.emplace_back(kMiddleC + k, k + 1);
            }
            break;
        }
        case Tier::Scales:
            return make_scale_score(1, num_notes, seed);
        case Tier::ScalesRand: {
            // Random-length fragments of the one-octave cycle.  The cycle is a
            // palindrome, so each new fragment restrikes the previous note at
            // the mirrored position and walks on from there: the hand
            // re-plants without crossing and a seam never fakes or
            // contradicts a thumb-under.
            std::uniform_int_distribution<int> start(0, 14);
            std::uniform_int_distribution<int> length(4, 15);
            int last = -1;
            while (static_cast<int>(nf.size()) < num_notes) {
                const int s = nf.empty() ? start(rng) : 14 - last;
                const int len = length(rng);
                for (int j = 0; j < len && static_cast<int>(nf.size()) < num_notes; ++j) {
                    const int pos = (s + j) % 15;
                    nf.emplace_back(kMiddleC + kScaleOffsets[static_cast<std::size_t>(pos)],
                                    kScaleFingers[static_cast<std::size_t>(pos)]);
                    last = pos;
                }
            }
            break;
        }
        case Tier::Menuet:
            for (int i = 0; i < num_notes; ++i) {
                const std::size_t pos = static_cast<std::size_t>(i) % kMenuetNotes.size();
                nf.emplace_back(kMenuetNotes[pos], kMenuetFingers[pos]);
            }
            break;
        case Tier::ImprovPred:
            nf = improv_walk(rng, num_notes, 5, kMiddleC - 5, kMiddleC + 9, true);
            break;
        case Tier::ImprovNonpred:
            nf = improv_walk(rng, num_notes, 12, kMiddleC - 17, kMiddleC + 21, false);
            break;
        default:
            throw UnknownTierError("bad tier value");
    }
    return assemble(tier, nf, rng);
}

void NoiseParams::validate() const {
    if (pressure_sigma < 0 || flex_sigma < 0 || flex_drift_per_minute < 0 ||
        timing_jitter_sigma < 0 || packet_loss_prob < 0)
        throw RangeError("noise parameters must be >= 0");
    if (packet_loss_prob >= 1.0) throw RangeError("packet_loss_prob must be < 1");
}

NoiseParams noise_preset(const std::string& name) {
    if (name == "clean") return {};
    if (name == "moderate") return {0.05, 0.3, 0.05, 0.001, 0.02, 0};
    if (name == "heavy") return {0.15, 0.6, 0.15, 0.003, 0.08, 0};
    throw ConfigError("unknown noise preset '" + name + "'");
}

namespace {

double trapezoid(double t, double t_on, double t_off, double amplitude) {
    if (t <= t_on || t >= t_off + kPulseFall) return 0.0;
    if (t < t_on + kPulseRise) return amplitude * (t - t_on) / kPulseRise;
    if (t <= t_off) return amplitude;
    return amplitude * (1.0 - (t - t_off) / kPulseFall);
}

double dip(double t, double t_on) {
    const double a = t_on - kDipLead;
    const double b = t_on - kDipGap;
    if (t <= a || t >= b) return 0.0;
    const double phi = (t - a) / (b - a);
    return -kDipDepth * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phi));
}

}  // namespace

Session render_sensors(const Score& score, const NoiseParams& np) {
    np.validate();
    const DecoderConfig trig;  // pulse amplitudes invert the velocity map
    std::mt19937_64 rng(np.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    std::array<double, kNumFingers> drift_rate{};
    for (auto& r : drift_rate) r = unit(rng) * np.flex_drift_per_minute / 60.0;

    // Per-finger pulse lists and the thumb-under dip onsets, time-ordered.
    struct Pulse {
        double t_on, t_off, amplitude;
    };
    std::array<std::vector<Pulse>, kNumFingers> pulses;
    std::vector<double> dip_onsets;
    const auto tu = score_tu_flags(score);
    for (std::size_t i = 0; i < score.entries.size(); ++i) {
        const auto& e = score.entries[i];
        const double amp =
            trig.theta_on + (trig.p_max - trig.theta_on) * (e.velocity - 1) / 126.0;
        pulses[static_cast<std::size_t>(e.finger.value() - 1)].push_back(
            {e.t_on, e.t_on + e.duration, amp});
        if (tu[i]) dip_onsets.push_back(e.t_on);
    }

    const double t_end =
        (score.entries.empty() ? 0.0
                               : score.entries.back().t_on + score.entries.back().duration) +
        0.5;
    const auto slots = static_cast<std::size_t>(t_end * kDefaultSampleRate) + 1;

    Session session;
    session.sensors.nominal_rate = kDefaultSampleRate;
    session.sensors.frames.reserve(slots);
    std::array<std::size_t, kNumFingers> pulse_idx{};
    std::size_t dip_idx = 0;
    double prev_t = -1.0;

    for (std::size_t i = 0; i < slots; ++i) {
        double t = static_cast<double>(i) / kDefaultSampleRate + unit(rng) * np.timing_jitter_sigma;
        t = std::max({t, 0.0, prev_t + 1e-6});
        prev_t = t;
        const bool dropped = coin(rng) < np.packet_loss_prob;

        SensorFrame frame;
        frame.t = t;
        for (std::size_t f = 0; f < kNumFingers; ++f) {
            auto& idx = pulse_idx[f];
            const auto& list = pulses[f];
            while (idx < list.size() && list[idx].t_off + kPulseFall < t) ++idx;
            const double signal =
                idx < list.size() ? trapezoid(t, list[idx].t_on, list[idx].t_off, list[idx].amplitude)
                                  : 0.0;
            frame.pressure[f] = signal + unit(rng) * np.pressure_sigma;
        }
        while (dip_idx < dip_onsets.size() && dip_onsets[dip_idx] - kDipGap < t) ++dip_idx;
        for (std::size_t f = 0; f < kNumFingers; ++f) {
            double v = drift_rate[f] * t + unit(rng) * np.flex_sigma;
            if (f == 0 && dip_idx < dip_onsets.size()) v += dip(t, dip_onsets[dip_idx]);
            frame.flex[f] = v;
        }
        for (std::size_t c = 0; c < kNumImuChannels; ++c) frame.imu[c] = unit(rng) * kImuSigma;

        if (!dropped) session.sensors.frames.push_back(frame);
    }

    for (const auto& e : score.entries) {
        const int midi = white_index_to_midi(e.white_index);
        session.events.push_back({e.t_on, NoteKind::On, midi, e.velocity});
        session.events.push_back({e.t_on + e.duration, NoteKind::Off, midi, 0});
    }
    std::sort(session.events.begin(), session.events.end(),
              [](const NoteEvent& a, const NoteEvent& b) { return a.t < b.t; });

    session.meta.name = to_string(score.tier) + "-" + std::to_string(np.seed);
    session.meta.tier = to_string(score.tier);
    session.meta.seed = static_cast<std::int64_t>(np.seed);
    session.meta.stream_offset = 0.0;
    return session;
}

}  // namespace glovekit

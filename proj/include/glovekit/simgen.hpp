#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glovekit/sessionio.hpp"

namespace glovekit {

/// Complexity tiers of scripted performances, easiest first.
enum class Tier {
    Cdefg,
    CdefgRand,
    Scales,
    ScalesRand,
    Menuet,
    ImprovPred,
    ImprovNonpred,
};

std::string to_string(Tier tier);
Tier tier_from_string(const std::string& s);  // throws UnknownTierError

const std::vector<Tier>& all_tiers();

/// One scripted note of a virtual-hand performance.
struct ScoreEntry {
    WhiteIndex white_index;
    FingerId finger;
    double t_on = 0.0;
    double duration = 0.0;
    int velocity = 64;
};

struct Score {
    std::vector<ScoreEntry> entries;
    Tier tier = Tier::Cdefg;
};

// Scripted timing: notes on a fixed grid, held most of the gap.
inline constexpr double kScoreStart = 0.5;     // seconds before the first note
inline constexpr double kNoteSpacing = 0.30;   // onset-to-onset
inline constexpr double kNoteDuration = 0.22;  // onset-to-release

/// Thumb-under flags implied by the fingering: entry i is flagged when
/// (finger_i - finger_{i-1}) * (note_i - note_{i-1}) < 0. Entry 0 is false.
std::vector<bool> score_tu_flags(const Score& score);

/// Deterministic scripted performance for a tier. num_notes must be >= 2.
/// Throws UnknownTierError for a tier outside the enum.
Score generate_score(Tier tier, int num_notes, std::uint64_t seed);

/// C-major scale runs over `octaves` octaves starting at middle C, canonical
/// crossing fingering both directions, truncated to num_notes. The scales
/// tier is make_scale_score(1, ...).
Score make_scale_score(int octaves, int num_notes, std::uint64_t seed);

/// Additive corruption applied when rendering a score into sensor frames.
struct NoiseParams {
    double pressure_sigma = 0.0;        // raw units, per frame per finger
    double flex_sigma = 0.0;            // raw units, per frame per finger
    double flex_drift_per_minute = 0.0; // scale of the per-channel linear drift
    double timing_jitter_sigma = 0.0;   // seconds, per frame
    double packet_loss_prob = 0.0;      // i.i.d. per frame
    std::uint64_t seed = 0;

    void validate() const;  // throws RangeError on a negative field or loss >= 1
};

/// Named presets accepted by the CLI: "clean", "moderate", "heavy".
/// Throws ConfigError for anything else. The seed is left at 0.
NoiseParams noise_preset(const std::string& name);

// Pulse and gesture shape constants (invented plumbing, fixed here).
inline constexpr double kPulseRise = 0.020;    // seconds, onset ramp
inline constexpr double kPulseFall = 0.030;    // seconds, release ramp
inline constexpr double kDipDepth = 1.0;       // thumb-flex TU dip amplitude
inline constexpr double kDipLead = 0.15;       // dip starts this long before onset
inline constexpr double kDipGap = 0.025;       // dip ends this long before onset
inline constexpr double kImuSigma = 0.01;      // IMU channels carry only noise

/// Renders the score on a 150 Hz grid: per-note trapezoidal pressure pulses
/// whose plateau inverts compute_velocity (so a noiseless round trip is
/// exact), a raised-cosine thumb-flex dip before every thumb-under note, and
/// the corruption described by NoiseParams. Ground-truth note events are
/// written at the scripted times.
Session render_sensors(const Score& score, const NoiseParams& np);

}  // namespace glovekit

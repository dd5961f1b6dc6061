#pragma once

#include "glovekit/core.hpp"

namespace glovekit {

/// Trigger thresholds and note accumulation settings for online decoding.
/// The defaults match the simulator's pulse conventions: pulse plateaus span
/// [0.5, 2.0] raw units, so theta_on sits below the softest plateau.
struct DecoderConfig {
    double theta_on = 0.5;   // press threshold, raw pressure units
    double theta_off = 0.2;  // release (re-arm) threshold
    double p_max = 2.0;      // pressure mapped to velocity 127
    double debounce = 0.05;  // seconds; same-finger triggers closer than this are dropped
    WhiteIndex reference_note{35};  // first note of any performance (C4)
    WhiteIndex range_lo{12};        // lowest white key of an 88-key keyboard (A0)
    WhiteIndex range_hi{63};        // highest white key (C8)

    /// Throws RangeError unless 0 < theta_off < theta_on < p_max and lo < hi.
    void validate() const;
};

}  // namespace glovekit

#pragma once

#include <functional>
#include <vector>

#include "glovekit/models.hpp"
#include "glovekit/sessionio.hpp"

namespace glovekit {

/// One detected press, from the theta_on crossing to the theta_off re-arm.
struct TriggerEvent {
    double t = 0.0;             // trigger time, seconds
    FingerId finger;
    double peak_pressure = 0.0; // max pressure between trigger and re-arm
    double t_release = 0.0;     // re-arm crossing (stream end if still held)
};

/// Per-finger hysteresis walk over the stream. A trigger fires when pressure
/// reaches cfg.theta_on while the finger is armed; the finger re-arms when
/// pressure falls below cfg.theta_off. Triggers closer than cfg.debounce on
/// the same finger are dropped, and when several fingers cross in the same
/// frame only the lowest finger emits (monophony) — dropped crossings still
/// put the finger in the held state. Output is ordered by time.
std::vector<TriggerEvent> detect_triggers(const SensorStream& stream, const DecoderConfig& cfg);

/// Linear map from peak pressure to MIDI velocity:
/// round(1 + 126 * (peak - theta_on) / (p_max - theta_on)), clamped to [1, 127].
int compute_velocity(double peak, const DecoderConfig& cfg);

struct PredictedNote {
    double t_on = 0.0;
    double t_off = 0.0;
    WhiteIndex white_index;
    int velocity = 1;
    FingerId finger;
};

/// Interval source for decoding: dN for the transition onto f_curr.
using IntervalFn = std::function<int(FingerId f_prev, FingerId f_curr, bool tu)>;

/// Core decode loop with a pluggable interval source. The first trigger emits
/// cfg.reference_note; every later trigger classifies thumb-under from the
/// thumb-flex window ending at the trigger, asks `intervals` for dN, and
/// accumulates note = prev + dN clamped into [cfg.range_lo, cfg.range_hi].
/// Velocities come from compute_velocity; note-off is the re-arm time.
std::vector<PredictedNote> decode_performance(const SensorStream& stream, const TUClassifier& tc,
                                              const DecoderConfig& cfg, int n, double dt,
                                              const IntervalFn& intervals);

/// Standard decode: intervals supplied by predict_interval on the model.
std::vector<PredictedNote> decode_performance(const SensorStream& stream, const IntervalModel& im,
                                              const TUClassifier& tc, const DecoderConfig& cfg,
                                              int n, double dt);

/// Flattens predicted notes into on/off events ordered by time
/// (offs before ons at equal times), with white indices mapped back to MIDI.
std::vector<NoteEvent> predicted_to_events(const std::vector<PredictedNote>& notes);

}  // namespace glovekit

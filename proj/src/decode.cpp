#include "glovekit/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace glovekit {

void DecoderConfig::validate() const {
    if (!(0.0 < theta_off && theta_off < theta_on && theta_on < p_max))
        throw RangeError("decoder thresholds must satisfy 0 < theta_off < theta_on < p_max");
    if (debounce < 0.0) throw RangeError("debounce must be >= 0");
    if (!(range_lo.value() < range_hi.value()))
        throw RangeError("keyboard range must satisfy lo < hi");
}

namespace {

struct FingerState {
    bool armed = true;
    double last_trigger_t = -std::numeric_limits<double>::infinity();
    // index into the output vector of the event currently accumulating its
    // peak; empty while armed or after a debounced/monophony-dropped press
    std::optional<std::size_t> open_event;
};

}  // namespace

std::vector<TriggerEvent> detect_triggers(const SensorStream& stream, const DecoderConfig& cfg) {
    cfg.validate();
    std::vector<TriggerEvent> out;
    std::array<FingerState, kNumFingers> state{};

    for (const SensorFrame& frame : stream.frames) {
        // Re-arm and peak tracking first, so a single frame cannot both
        // re-arm a finger and trigger it again.
        for (int f = 0; f < kNumFingers; ++f) {
            auto& st = state[static_cast<std::size_t>(f)];
            if (st.armed) continue;
            const double p = frame.pressure[static_cast<std::size_t>(f)];
            if (p < cfg.theta_off) {
                if (st.open_event) {
                    out[*st.open_event].t_release = frame.t;
                    st.open_event.reset();
                }
                st.armed = true;
            } else if (st.open_event) {
                out[*st.open_event].peak_pressure =
                    std::max(out[*st.open_event].peak_pressure, p);
            }
        }

        // Collect this frame's crossings; monophony keeps the lowest finger.
        int winner = -1;
        for (int f = 0; f < kNumFingers; ++f) {
            auto& st = state[static_cast<std::size_t>(f)];
            if (!st.armed) continue;
            if (frame.pressure[static_cast<std::size_t>(f)] < cfg.theta_on) continue;
            st.armed = false;
            if (winner < 0) winner = f;
        }
        if (winner < 0) continue;

        auto& st = state[static_cast<std::size_t>(winner)];
        if (frame.t - st.last_trigger_t < cfg.debounce) continue;  // debounced, stays held
        st.last_trigger_t = frame.t;
        st.open_event = out.size();
        out.push_back({frame.t, FingerId(winner + 1),
                       frame.pressure[static_cast<std::size_t>(winner)], frame.t});
    }

    // Stream ended while held: close at the final frame.
    if (!stream.frames.empty())
        for (auto& st : state)
            if (st.open_event) out[*st.open_event].t_release = stream.frames.back().t;

    return out;
}

int compute_velocity(double peak, const DecoderConfig& cfg) {
    const double v = 1.0 + 126.0 * (peak - cfg.theta_on) / (cfg.p_max - cfg.theta_on);
    return static_cast<int>(std::clamp(std::lround(v), 1L, 127L));
}

std::vector<PredictedNote> decode_performance(const SensorStream& stream, const TUClassifier& tc,
                                              const DecoderConfig& cfg, int n, double dt,
                                              const IntervalFn& intervals) {
    const auto triggers = detect_triggers(stream, cfg);
    std::vector<PredictedNote> notes;
    notes.reserve(triggers.size());

    const int lo = cfg.range_lo.value();
    const int hi = cfg.range_hi.value();
    int prev_note = 0;
    std::optional<FingerId> prev_finger;

    for (const TriggerEvent& ev : triggers) {
        int note;
        if (!prev_finger) {
            note = std::clamp(cfg.reference_note.value(), lo, hi);
        } else {
            const auto window = resample_window(stream, ChannelRef::thumb_flex(), ev.t, n, dt);
            const bool tu = predict_tu(tc, ev.finger, window).tu;
            note = std::clamp(prev_note + intervals(*prev_finger, ev.finger, tu), lo, hi);
        }
        notes.push_back({ev.t, ev.t_release, WhiteIndex(note),
                         compute_velocity(ev.peak_pressure, cfg), ev.finger});
        prev_note = note;
        prev_finger = ev.finger;
    }
    return notes;
}

std::vector<PredictedNote> decode_performance(const SensorStream& stream, const IntervalModel& im,
                                              const TUClassifier& tc, const DecoderConfig& cfg,
                                              int n, double dt) {
    return decode_performance(stream, tc, cfg, n, dt,
                              [&im](FingerId f_prev, FingerId f_curr, bool tu) {
                                  return predict_interval(im, f_prev, f_curr, tu);
                              });
}

std::vector<NoteEvent> predicted_to_events(const std::vector<PredictedNote>& notes) {
    std::vector<NoteEvent> events;
    events.reserve(notes.size() * 2);
    for (const PredictedNote& n : notes) {
        const int midi = white_index_to_midi(n.white_index);
        events.push_back({n.t_on, NoteKind::On, midi, n.velocity});
        events.push_back({n.t_off, NoteKind::Off, midi, 0});
    }
    std::stable_sort(events.begin(), events.end(), [](const NoteEvent& a, const NoteEvent& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.kind == NoteKind::Off && b.kind == NoteKind::On;
    });
    return events;
}

}  // namespace glovekit

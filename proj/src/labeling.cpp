#include "glovekit/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace glovekit {

namespace {

double interp_channel(const std::vector<SensorFrame>& frames, ChannelRef ch, double t,
                      std::size_t hint_lo) {
    // t is inside [frames.front().t, frames.back().t]
    auto it = std::lower_bound(frames.begin() + static_cast<std::ptrdiff_t>(hint_lo), frames.end(),
                               t, [](const SensorFrame& f, double tt) { return f.t < tt; });
    if (it == frames.begin()) return sample_channel(*it, ch);
    if (it == frames.end()) return sample_channel(frames.back(), ch);
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    if (hi.t == t) return sample_channel(hi, ch);
    const double w = (t - lo.t) / (hi.t - lo.t);
    return (1.0 - w) * sample_channel(lo, ch) + w * sample_channel(hi, ch);
}

// Integral of the piecewise-linear interpolant of one channel over [a, b],
// both clipped to the stream span by the caller.
double trapezoid_integral(const std::vector<SensorFrame>& frames, ChannelRef ch, double a,
                          double b) {
    if (a >= b) return 0.0;
    auto it = std::upper_bound(frames.begin(), frames.end(), a,
                               [](double tt, const SensorFrame& f) { return tt < f.t; });
    double t_prev = a;
    double v_prev = interp_channel(frames, ch, a, 0);
    double sum = 0.0;
    for (; it != frames.end() && it->t < b; ++it) {
        const double v = sample_channel(*it, ch);
        sum += 0.5 * (v_prev + v) * (it->t - t_prev);
        t_prev = it->t;
        v_prev = v;
    }
    const double v_end = interp_channel(frames, ch, b, 0);
    sum += 0.5 * (v_prev + v_end) * (b - t_prev);
    return sum;
}

}  // namespace

SegmentationResult segment_notes(const std::vector<NoteEvent>& events) {
    SegmentationResult result;
    if (events.empty()) return result;

    std::map<int, std::deque<std::size_t>> open;  // midi note -> indices of open segments
    for (const auto& e : events) {
        if (e.kind == NoteKind::On) {
            NoteSegment seg;
            seg.t_on = e.t;
            seg.t_off = std::numeric_limits<double>::quiet_NaN();
            seg.white_index = midi_to_white_index(e.midi_note);
            if (e.velocity < 1 || e.velocity > 127)
                throw RangeError("note-on velocity out of range: " + std::to_string(e.velocity));
            seg.velocity = e.velocity;
            open[e.midi_note].push_back(result.segments.size());
            result.segments.push_back(seg);
        } else {
            auto it = open.find(e.midi_note);
            if (it == open.end() || it->second.empty()) {
                ++result.orphan_offs;
                continue;
            }
            result.segments[it->second.front()].t_off = e.t;
            it->second.pop_front();
        }
    }

    const double close_t = events.back().t + 0.1;
    for (auto& seg : result.segments) {
        if (std::isnan(seg.t_off)) {
            seg.t_off = close_t;
            ++result.unmatched_closed;
        }
        if (!(seg.t_on < seg.t_off))
            throw ValidationError("note-off does not follow its note-on in time");
    }

    for (std::size_t i = 1; i < result.segments.size(); ++i) {
        if (result.segments[i].t_on < result.segments[i - 1].t_off)
            throw OverlapError("overlapping notes at t=" + format_number(result.segments[i].t_on) +
                               "; performances are monophonic");
    }
    return result;
}

FingerId assign_finger(const SensorStream& stream, const NoteSegment& seg) {
    const auto& frames = stream.frames;
    if (frames.empty() || seg.t_off < frames.front().t || seg.t_on > frames.back().t)
        throw EmptyWindowError("segment [" + format_number(seg.t_on) + ", " +
                               format_number(seg.t_off) + "] lies outside the sensor stream");

    const double a = std::max(seg.t_on, frames.front().t);
    const double b = std::min(seg.t_off, frames.back().t);

    int best = 0;
    double best_integral = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kNumFingers; ++i) {
        const double integral = trapezoid_integral(frames, ChannelRef::pressure(i), a, b);
        if (integral > best_integral) {  // ties break toward the thumb
            best_integral = integral;
            best = i;
        }
    }
    return FingerId(best + 1);
}

bool label_thumb_under(FingerId f_prev, FingerId f_curr, WhiteIndex n_prev, WhiteIndex n_curr) {
    return (f_curr.value() - f_prev.value()) * (n_curr - n_prev) < 0;
}

std::vector<LabeledEvent> build_dataset(const Session& session, int n, double dt) {
    const auto segmented = segment_notes(session.events);
    std::vector<LabeledEvent> out;
    out.reserve(segmented.segments.size());
    for (const auto& seg : segmented.segments) {
        LabeledEvent ev;
        ev.finger = assign_finger(session.sensors, seg);
        ev.white_index = seg.white_index;
        ev.flex_window = resample_window(session.sensors, ChannelRef::thumb_flex(), seg.t_on, n, dt);
        ev.t_on = seg.t_on;
        ev.tu = out.empty() ? false
                            : label_thumb_under(out.back().finger, ev.finger,
                                                out.back().white_index, ev.white_index);
        out.push_back(std::move(ev));
    }
    return out;
}

std::string serialize_dataset_csv(const std::vector<LabeledEvent>& events) {
    std::string out = "t_on,finger,white_index,tu";
    const std::size_t n = events.empty() ? 0 : events.front().flex_window.size();
    for (std::size_t i = 1; i <= n; ++i) out += ",w" + std::to_string(i);
    out.push_back('\n');
    for (const auto& e : events) {
        out += format_number(e.t_on);
        out.push_back(',');
        out += std::to_string(e.finger.value());
        out.push_back(',');
        out += std::to_string(e.white_index.value());
        out += e.tu ? ",1" : ",0";
        for (double w : e.flex_window) {
            out.push_back(',');
            out += format_number(w);
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace glovekit

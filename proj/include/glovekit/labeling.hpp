#pragma once

#include <string>
#include <vector>

#include "glovekit/core.hpp"
#include "glovekit/sessionio.hpp"

namespace glovekit {

/// A matched on/off pair on a white key.
struct NoteSegment {
    double t_on = 0.0;
    double t_off = 0.0;
    WhiteIndex white_index;
    int velocity = 64;  // 1..127, from the on event
};

struct SegmentationResult {
    std::vector<NoteSegment> segments;
    int unmatched_closed = 0;  // trailing ons closed at last event time + 0.1 s
    int orphan_offs = 0;       // offs with no matching open note, skipped
};

/// Pairs each note-on with the next note-off of the same midi note.
/// Throws OverlapError when two segments overlap (performances are
/// monophonic) and propagates BlackKeyError for non-C-major notes.
SegmentationResult segment_notes(const std::vector<NoteEvent>& events);

/// The finger playing a segment is the one whose pressure channel has the
/// highest trapezoidal integral over [t_on, t_off]. Integration runs on the
/// raw irregular timestamps; ties break toward the thumb. Throws
/// EmptyWindowError when the segment lies outside the stream span.
FingerId assign_finger(const SensorStream& stream, const NoteSegment& seg);

/// Thumb-under indicator: fingers and notes moving in opposite directions.
bool label_thumb_under(FingerId f_prev, FingerId f_curr, WhiteIndex n_prev, WhiteIndex n_curr);

/// One supervised training row: a played note with its finger, thumb-under
/// flag and the thumb-flex history window ending at the trigger instant.
struct LabeledEvent {
    FingerId finger;
    WhiteIndex white_index;
    bool tu = false;
    std::vector<double> flex_window;  // length n, normalized thumb flex
    double t_on = 0.0;
};

/// Turns a session into labeled rows, one per note segment, in time order.
/// flex_window = resample_window(thumb flex, t_end = t_on, n, dt); tu is
/// computed against the previous event (the first event gets tu = false).
/// The session's flex channels must already be normalized.
std::vector<LabeledEvent> build_dataset(const Session& session, int n, double dt);

/// CSV dump `t_on,finger,white_index,tu,w1..wn` of a labeled dataset.
std::string serialize_dataset_csv(const std::vector<LabeledEvent>& events);

}  // namespace glovekit

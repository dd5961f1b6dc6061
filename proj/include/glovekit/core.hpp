#pragma once

#include <array>
#include <compare>
#include <vector>

#include "glovekit/errors.hpp"

namespace glovekit {

inline constexpr int kNumFingers = 5;
inline constexpr int kNumImuChannels = 6;
inline constexpr double kDefaultSampleRate = 150.0;  // Hz

/// One timestamped reading of all glove channels.
struct SensorFrame {
    double t = 0.0;                     // seconds
    std::array<double, 5> pressure{};   // raw units, >= 0
    std::array<double, 5> flex{};       // raw units, unbounded
    std::array<double, 6> imu{};        // accel x/y/z + gyro x/y/z
};

/// Ordered sequence of frames. Timestamps are strictly increasing; gaps up to
/// 0.2 s between consecutive frames are tolerated (serial packet loss).
struct SensorStream {
    std::vector<SensorFrame> frames;
    double nominal_rate = kDefaultSampleRate;

    bool empty() const { return frames.empty(); }
    std::size_t size() const { return frames.size(); }
    double t_first() const { return frames.front().t; }
    double t_last() const { return frames.back().t; }
};

enum class NoteKind { On, Off };

/// A single MIDI note-on or note-off. Velocity 0 is only valid on note-off.
struct NoteEvent {
    double t = 0.0;
    NoteKind kind = NoteKind::On;
    int midi_note = 0;  // 0..127
    int velocity = 0;   // 0..127

    friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

/// Throws RangeError unless the event satisfies the NoteEvent invariants.
void validate_note_event(const NoteEvent& e);

/// Finger index, 1 = thumb .. 5 = pinky.
class FingerId {
public:
    FingerId() = default;
    explicit FingerId(int value) : value_(value) {
        if (value < 1 || value > kNumFingers)
            throw RangeError("finger id must be in 1..5, got " + std::to_string(value));
    }
    int value() const { return value_; }
    auto operator<=>(const FingerId&) const = default;

private:
    int value_ = 1;
};

/// Ordinal of a white key, counting from MIDI note 0. All interval arithmetic
/// happens in this space so that C-major steps are integers.
class WhiteIndex {
public:
    WhiteIndex() = default;
    explicit WhiteIndex(int value) : value_(value) {
        if (value < 0)
            throw RangeError("white index must be >= 0, got " + std::to_string(value));
    }
    int value() const { return value_; }
    auto operator<=>(const WhiteIndex&) const = default;

private:
    int value_ = 0;
};

/// Signed interval in white-key steps.
inline int operator-(WhiteIndex a, WhiteIndex b) { return a.value() - b.value(); }

/// True when the note is one of the C-major (white) keys.
bool is_white_key(int midi_note);

/// Maps a white MIDI note to its white-key ordinal:
/// index = 7 * octave + rank of the pitch class among {C,D,E,F,G,A,B}.
/// Throws BlackKeyError for black keys, RangeError outside 0..127.
WhiteIndex midi_to_white_index(int midi_note);

/// Exact inverse of midi_to_white_index. Throws RangeError when the
/// resulting MIDI note would exceed 127.
int white_index_to_midi(WhiteIndex index);

}  // namespace glovekit

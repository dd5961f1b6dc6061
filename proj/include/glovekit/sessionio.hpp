#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glovekit/core.hpp"

namespace glovekit {

struct SessionMeta {
    std::string name;
    std::string tier;
    std::optional<std::int64_t> seed;
    double stream_offset = 0.0;  // seconds added to note timestamps at load
};

/// One recorded run: a sensor stream plus the synchronized note events.
struct Session {
    SensorStream sensors;
    std::vector<NoteEvent> events;
    SessionMeta meta;
};

/// Raw 3-byte MIDI channel message (note on/off only).
struct MidiMessage {
    std::uint8_t status = 0;
    std::uint8_t data1 = 0;
    std::uint8_t data2 = 0;

    friend bool operator==(const MidiMessage&, const MidiMessage&) = default;
};

/// Shortest decimal string that round-trips the double exactly.
std::string format_number(double value);

inline constexpr std::string_view kSensorCsvHeader =
    "t,p1,p2,p3,p4,p5,f1,f2,f3,f4,f5,ax,ay,az,gx,gy,gz";
inline constexpr std::string_view kNoteCsvHeader = "t,kind,midi_note,velocity";

/// Parses a sensors.csv body. Throws FormatError on a bad header, wrong column
/// count or non-numeric field; OrderError when timestamps do not strictly increase.
SensorStream parse_sensor_csv(std::string_view text);
std::string serialize_sensor_csv(const SensorStream& stream);

/// Parses a notes.csv body. Syntax and ranges only; on/off pairing is checked
/// later by segment_notes.
std::vector<NoteEvent> parse_note_csv(std::string_view text);
std::string serialize_note_csv(const std::vector<NoteEvent>& events);

/// Note event -> 3-byte wire message, 0x9n for on, 0x8n for off.
MidiMessage encode_midi_message(const NoteEvent& e, int channel);

/// Inverse of encode. A note-on with velocity 0 is normalized to a note-off.
/// The timestamp is supplied by the caller (the wire carries no time).
NoteEvent decode_midi_message(const MidiMessage& m, double t = 0.0);

/// Selects one scalar channel of a frame.
struct ChannelRef {
    enum class Kind { Pressure, Flex, Imu };
    Kind kind = Kind::Pressure;
    int index = 0;  // 0-based within the group

    static ChannelRef pressure(int i) { return {Kind::Pressure, i}; }
    static ChannelRef flex(int i) { return {Kind::Flex, i}; }
    static ChannelRef imu(int i) { return {Kind::Imu, i}; }
    static ChannelRef thumb_flex() { return {Kind::Flex, 0}; }
};

double sample_channel(const SensorFrame& frame, ChannelRef ch);

/// Values of a channel linearly interpolated at the n uniform instants
/// t_end - (n-1)*dt, ..., t_end. Instants outside the stream span are clamped
/// to the boundary frame values. Throws EmptyStreamError on an empty stream.
std::vector<double> resample_window(const SensorStream& stream, ChannelRef ch, double t_end,
                                    int n, double dt);

/// Per-session recalibration: each flex channel becomes (x - median) / max(std, eps)
/// with eps = 1e-6. Pressure and IMU channels are untouched.
SensorStream normalize_flex(const SensorStream& stream);

/// Reads sensors.csv, notes.csv and meta.json from a session directory.
/// meta.stream_offset is added to every note timestamp here.
Session load_session(const std::filesystem::path& dir);

/// Writes the three session files. Inverse of load_session: the stream offset
/// is subtracted back so that save(load(dir)) reproduces dir byte for byte.
void save_session(const Session& session, const std::filesystem::path& dir);

/// Binary note stream: repeated records of little-endian u32 delta time in
/// milliseconds (relative to the previous record, first record relative to 0)
/// followed by the 3 message bytes.
void write_midi_stream(std::ostream& out, const std::vector<NoteEvent>& events, int channel);
std::vector<NoteEvent> read_midi_stream(std::istream& in);

}  // namespace glovekit

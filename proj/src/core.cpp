#include "glovekit/core.hpp"

#include <algorithm>

namespace glovekit {

namespace {

// Pitch classes of the white keys within one octave, in ascending order.
constexpr std::array<int, 7> kWhitePitchClasses = {0, 2, 4, 5, 7, 9, 11};

}  // namespace

void validate_note_event(const NoteEvent& e) {
    if (e.midi_note < 0 || e.midi_note > 127)
        throw RangeError("midi note out of range: " + std::to_string(e.midi_note));
    if (e.velocity < 0 || e.velocity > 127)
        throw RangeError("velocity out of range: " + std::to_string(e.velocity));
    if (e.velocity == 0 && e.kind == NoteKind::On)
        throw RangeError("velocity 0 is only permitted on note-off");
}

bool is_white_key(int midi_note) {
    const int pc = midi_note % 12;
    return std::find(kWhitePitchClasses.begin(), kWhitePitchClasses.end(), pc) !=
           kWhitePitchClasses.end();
}

WhiteIndex midi_to_white_index(int midi_note) {
    if (midi_note < 0 || midi_note > 127)
        throw RangeError("midi note out of range: " + std::to_string(midi_note));
    const int octave = midi_note / 12;
    const int pc = midi_note % 12;
    const auto it = std::find(kWhitePitchClasses.begin(), kWhitePitchClasses.end(), pc);
    if (it == kWhitePitchClasses.end())
        throw BlackKeyError("midi note " + std::to_string(midi_note) + " is not a white key");
    const int rank = static_cast<int>(it - kWhitePitchClasses.begin());
    return WhiteIndex(7 * octave + rank);
}

int white_index_to_midi(WhiteIndex index) {
    const int octave = index.value() / 7;
    const int rank = index.value() % 7;
    const int midi = 12 * octave + kWhitePitchClasses[static_cast<std::size_t>(rank)];
    if (midi > 127)
        throw RangeError("white index " + std::to_string(index.value()) +
                         " maps beyond the MIDI range");
    return midi;
}

}  // namespace glovekit

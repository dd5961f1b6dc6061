#include "glovekit/sessionio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace glovekit {

namespace {

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

double parse_double_field(std::string_view field, int line_no) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw FormatError("line " + std::to_string(line_no) + ": not a number: '" +
                          std::string(field) + "'");
    if (!std::isfinite(value))
        throw FormatError("line " + std::to_string(line_no) + ": non-finite value");
    return value;
}

int parse_int_field(std::string_view field, int line_no) {
    int value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw FormatError("line " + std::to_string(line_no) + ": not an integer: '" +
                          std::string(field) + "'");
    return value;
}

/// Iterates non-empty lines of a CSV body, checking the header first.
class CsvReader {
public:
    CsvReader(std::string_view text, std::string_view header) : text_(text) {
        const auto first = next_line();
        if (!first || strip_cr(*first) != header)
            throw FormatError("bad header, expected '" + std::string(header) + "'");
    }

    std::optional<std::string_view> next_line() {
        while (pos_ < text_.size()) {
            std::size_t end = text_.find('\n', pos_);
            if (end == std::string_view::npos) end = text_.size();
            std::string_view line = strip_cr(text_.substr(pos_, end - pos_));
            pos_ = end + 1;
            ++line_no_;
            if (!line.empty()) return line;
        }
        return std::nullopt;
    }

    int line_no() const { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_no_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    double m = values[mid];
    if (n % 2 == 0) {
        std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                         values.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + values[mid - 1]);
    }
    return m;
}

}  // namespace

std::string format_number(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

SensorStream parse_sensor_csv(std::string_view text) {
    CsvReader reader(text, kSensorCsvHeader);
    SensorStream stream;
    while (const auto line = reader.next_line()) {
        const auto fields = split_fields(*line);
        if (fields.size() != 17)
            throw FormatError("line " + std::to_string(reader.line_no()) + ": expected 17 columns, got " +
                              std::to_string(fields.size()));
        SensorFrame frame;
        frame.t = parse_double_field(fields[0], reader.line_no());
        for (int i = 0; i < 5; ++i)
            frame.pressure[static_cast<std::size_t>(i)] =
                parse_double_field(fields[static_cast<std::size_t>(1 + i)], reader.line_no());
        for (int i = 0; i < 5; ++i)
            frame.flex[static_cast<std::size_t>(i)] =
                parse_double_field(fields[static_cast<std::size_t>(6 + i)], reader.line_no());
        for (int i = 0; i < 6; ++i)
            frame.imu[static_cast<std::size_t>(i)] =
                parse_double_field(fields[static_cast<std::size_t>(11 + i)], reader.line_no());
        if (!stream.frames.empty() && frame.t <= stream.frames.back().t)
            throw OrderError("line " + std::to_string(reader.line_no()) +
                             ": timestamps must be strictly increasing");
        stream.frames.push_back(frame);
    }
    return stream;
}

std::string serialize_sensor_csv(const SensorStream& stream) {
    std::string out(kSensorCsvHeader);
    out.push_back('\n');
    for (const auto& f : stream.frames) {
        out += format_number(f.t);
        for (double v : f.pressure) {
            out.push_back(',');
            out += format_number(v);
        }
        for (double v : f.flex) {
            out.push_back(',');
            out += format_number(v);
        }
        for (double v : f.imu) {
            out.push_back(',');
            out += format_number(v);
        }
        out.push_back('\n');
    }
    return out;
}

std::vector<NoteEvent> parse_note_csv(std::string_view text) {
    CsvReader reader(text, kNoteCsvHeader);
    std::vector<NoteEvent> events;
    while (const auto line = reader.next_line()) {
        const auto fields = split_fields(*line);
        if (fields.size() != 4)
            throw FormatError("line " + std::to_string(reader.line_no()) + ": expected 4 columns, got " +
                              std::to_string(fields.size()));
        NoteEvent e;
        e.t = parse_double_field(fields[0], reader.line_no());
        if (fields[1] == "on")
            e.kind = NoteKind::On;
        else if (fields[1] == "off")
            e.kind = NoteKind::Off;
        else
            throw FormatError("line " + std::to_string(reader.line_no()) + ": kind must be on or off");
        e.midi_note = parse_int_field(fields[2], reader.line_no());
        e.velocity = parse_int_field(fields[3], reader.line_no());
        validate_note_event(e);
        if (!events.empty() && e.t < events.back().t)
            throw FormatError("line " + std::to_string(reader.line_no()) +
                              ": events must be time-ordered");
        events.push_back(e);
    }
    return events;
}

std::string serialize_note_csv(const std::vector<NoteEvent>& events) {
    std::string out(kNoteCsvHeader);
    out.push_back('\n');
    for (const auto& e : events) {
        out += format_number(e.t);
        out += e.kind == NoteKind::On ? ",on," : ",off,";
        out += std::to_string(e.midi_note);
        out.push_back(',');
        out += std::to_string(e.velocity);
        out.push_back('\n');
    }
    return out;
}

MidiMessage encode_midi_message(const NoteEvent& e, int channel) {
    validate_note_event(e);
    if (channel < 0 || channel > 15)
        throw RangeError("midi channel out of range: " + std::to_string(channel));
    MidiMessage m;
    m.status = static_cast<std::uint8_t>((e.kind == NoteKind::On ? 0x90 : 0x80) | channel);
    m.data1 = static_cast<std::uint8_t>(e.midi_note);
    m.data2 = static_cast<std::uint8_t>(e.velocity);
    return m;
}

NoteEvent decode_midi_message(const MidiMessage& m, double t) {
    const int nibble = m.status >> 4;
    if (nibble != 0x9 && nibble != 0x8)
        throw UnsupportedStatusError("unsupported status byte " + std::to_string(m.status));
    if (m.data1 >= 0x80 || m.data2 >= 0x80)
        throw RangeError("midi data byte >= 0x80");
    NoteEvent e;
    e.t = t;
    e.midi_note = m.data1;
    e.velocity = m.data2;
    // Note-on with velocity 0 means note-off on the wire.
    e.kind = (nibble == 0x8 || m.data2 == 0) ? NoteKind::Off : NoteKind::On;
    return e;
}

double sample_channel(const SensorFrame& frame, ChannelRef ch) {
    switch (ch.kind) {
        case ChannelRef::Kind::Pressure:
            return frame.pressure.at(static_cast<std::size_t>(ch.index));
        case ChannelRef::Kind::Flex:
            return frame.flex.at(static_cast<std::size_t>(ch.index));
        case ChannelRef::Kind::Imu:
            return frame.imu.at(static_cast<std::size_t>(ch.index));
    }
    throw RangeError("bad channel kind");
}

std::vector<double> resample_window(const SensorStream& stream, ChannelRef ch, double t_end,
                                    int n, double dt) {
    if (stream.frames.empty()) throw EmptyStreamError("cannot resample an empty stream");
    if (n < 1) throw RangeError("window length must be >= 1");
    if (dt <= 0.0) throw RangeError("window step must be > 0");

    const auto& frames = stream.frames;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = t_end - static_cast<double>(n - 1 - i) * dt;
        double value;
        if (t <= frames.front().t) {
            value = sample_channel(frames.front(), ch);
        } else if (t >= frames.back().t) {
            value = sample_channel(frames.back(), ch);
        } else {
            const auto it = std::lower_bound(frames.begin(), frames.end(), t,
                                             [](const SensorFrame& f, double tt) { return f.t < tt; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double w = (t - lo.t) / (hi.t - lo.t);
            value = (1.0 - w) * sample_channel(lo, ch) + w * sample_channel(hi, ch);
        }
        out[static_cast<std::size_t>(i)] = value;
    }
    return out;
}

SensorStream normalize_flex(const SensorStream& stream) {
    constexpr double kEps = 1e-6;
    if (stream.frames.empty()) return stream;
    SensorStream out = stream;
    const std::size_t count = stream.frames.size();
    for (std::size_t c = 0; c < 5; ++c) {
        std::vector<double> values(count);
        for (std::size_t i = 0; i < count; ++i) values[i] = stream.frames[i].flex[c];
        const double median = median_of(values);
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(count);
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(count);
        const double scale = std::max(std::sqrt(var), kEps);
        for (std::size_t i = 0; i < count; ++i)
            out.frames[i].flex[c] = (stream.frames[i].flex[c] - median) / scale;
    }
    return out;
}

Session load_session(const std::filesystem::path& dir) {
    Session s;
    s.sensors = parse_sensor_csv(read_file(dir / "sensors.csv"));
    s.events = parse_note_csv(read_file(dir / "notes.csv"));

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(dir / "meta.json"));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("meta.json: " + std::string(e.what()));
    }
    if (!meta.contains("name") || !meta.contains("tier"))
        throw FormatError("meta.json: missing name or tier");
    s.meta.name = meta.at("name").get<std::string>();
    s.meta.tier = meta.at("tier").get<std::string>();
    if (meta.contains("seed") && !meta.at("seed").is_null())
        s.meta.seed = meta.at("seed").get<std::int64_t>();
    if (meta.contains("stream_offset"))
        s.meta.stream_offset = meta.at("stream_offset").get<double>();

    for (auto& e : s.events) e.t += s.meta.stream_offset;

    if (!s.events.empty()) {
        if (s.sensors.frames.empty())
            throw ValidationError("session has note events but no sensor frames");
        const double lo = s.sensors.t_first() - 0.5;
        const double hi = s.sensors.t_last() + 0.5;
        for (const auto& e : s.events)
            if (e.t < lo || e.t > hi)
                throw ValidationError("note event at t=" + format_number(e.t) +
                                      " lies outside the sensor stream span");
    }
    return s;
}

void save_session(const Session& session, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "sensors.csv", serialize_sensor_csv(session.sensors));

    std::vector<NoteEvent> raw = session.events;
    for (auto& e : raw) e.t -= session.meta.stream_offset;
    write_file(dir / "notes.csv", serialize_note_csv(raw));

    nlohmann::json meta;
    meta["name"] = session.meta.name;
    meta["tier"] = session.meta.tier;
    if (session.meta.seed)
        meta["seed"] = *session.meta.seed;
    else
        meta["seed"] = nullptr;
    meta["stream_offset"] = session.meta.stream_offset;
    write_file(dir / "meta.json", meta.dump(2) + "\n");
}

void write_midi_stream(std::ostream& out, const std::vector<NoteEvent>& events, int channel) {
    double prev_t = 0.0;
    for (const auto& e : events) {
        const double delta_s = std::max(0.0, e.t - prev_t);
        const auto delta_ms = static_cast<std::uint32_t>(std::llround(delta_s * 1000.0));
        std::array<char, 7> rec{};
        rec[0] = static_cast<char>(delta_ms & 0xFF);
        rec[1] = static_cast<char>((delta_ms >> 8) & 0xFF);
        rec[2] = static_cast<char>((delta_ms >> 16) & 0xFF);
        rec[3] = static_cast<char>((delta_ms >> 24) & 0xFF);
        const MidiMessage m = encode_midi_message(e, channel);
        rec[4] = static_cast<char>(m.status);
        rec[5] = static_cast<char>(m.data1);
        rec[6] = static_cast<char>(m.data2);
        out.write(rec.data(), rec.size());
        prev_t = e.t;
    }
}

std::vector<NoteEvent> read_midi_stream(std::istream& in) {
    std::vector<NoteEvent> events;
    double t = 0.0;
    std::array<char, 7> rec{};
    while (in.read(rec.data(), rec.size())) {
        const std::uint32_t delta_ms = static_cast<std::uint8_t>(rec[0]) |
                                       (static_cast<std::uint32_t>(static_cast<std::uint8_t>(rec[1])) << 8) |
                                       (static_cast<std::uint32_t>(static_cast<std::uint8_t>(rec[2])) << 16) |
                                       (static_cast<std::uint32_t>(static_cast<std::uint8_t>(rec[3])) << 24);
        t += static_cast<double>(delta_ms) / 1000.0;
        const MidiMessage m{static_cast<std::uint8_t>(rec[4]), static_cast<std::uint8_t>(rec[5]),
                            static_cast<std::uint8_t>(rec[6])};
        events.push_back(decode_midi_message(m, t));
    }
    if (in.gcount() != 0)
        throw FormatError("truncated midi stream record");
    return events;
}

}  // namespace glovekit

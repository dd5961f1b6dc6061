// Python bindings for the glovekit core. The module mirrors the C++ API
// one-to-one: plain structs become attribute classes, free functions keep
// their names, and FingerId/WhiteIndex accept bare ints.

#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "glovekit/decode.hpp"
#include "glovekit/eval.hpp"

namespace py = pybind11;
using namespace glovekit;

// ContextKey is used as a dict key (IntervalModel.counts), so it must convert
// to a hashable tuple rather than the default list.
namespace pybind11::detail {
template <>
struct type_caster<ContextKey> {
    PYBIND11_TYPE_CASTER(ContextKey, const_name("tuple[int, int, int]"));

    bool load(handle src, bool convert) {
        if (!isinstance<sequence>(src) || isinstance<str>(src)) return false;
        const auto seq = reinterpret_borrow<sequence>(src);
        if (seq.size() != value.size()) return false;
        for (std::size_t i = 0; i < value.size(); ++i) {
            make_caster<int> item;
            if (!item.load(seq[i], convert)) return false;
            value[i] = cast_op<int>(item);
        }
        return true;
    }

    static handle cast(const ContextKey& src, return_value_policy, handle) {
        return make_tuple(src[0], src[1], src[2]).release();
    }
};
}  // namespace pybind11::detail

PYBIND11_MODULE(_glovekit, m) {
    m.doc() = "Offline imitation learning from glove sensor streams to MIDI note sequences";

    // --- errors ------------------------------------------------------------
    auto base = py::register_exception<Error>(m, "GlovekitError");
    py::register_exception<BlackKeyError>(m, "BlackKeyError", base.ptr());
    py::register_exception<RangeError>(m, "RangeError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<OrderError>(m, "OrderError", base.ptr());
    py::register_exception<EmptyStreamError>(m, "EmptyStreamError", base.ptr());
    py::register_exception<UnsupportedStatusError>(m, "UnsupportedStatusError", base.ptr());
    py::register_exception<OverlapError>(m, "OverlapError", base.ptr());
    py::register_exception<EmptyWindowError>(m, "EmptyWindowError", base.ptr());
    py::register_exception<EmptyDataError>(m, "EmptyDataError", base.ptr());
    py::register_exception<DimensionMismatchError>(m, "DimensionMismatchError", base.ptr());
    py::register_exception<EmptyDevError>(m, "EmptyDevError", base.ptr());
    py::register_exception<UnknownTierError>(m, "UnknownTierError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

    // --- core --------------------------------------------------------------
    m.attr("NUM_FINGERS") = kNumFingers;
    m.attr("NUM_IMU_CHANNELS") = kNumImuChannels;
    m.attr("DEFAULT_SAMPLE_RATE") = kDefaultSampleRate;

    py::class_<FingerId>(m, "FingerId")
        .def(py::init<>())
        .def(py::init<int>(), py::arg("value"))
        .def_property_readonly("value", &FingerId::value)
        .def("__int__", &FingerId::value)
        .def(py::self == py::self)
        .def(py::self < py::self)
        .def("__hash__", [](const FingerId& f) { return std::hash<int>{}(f.value()); })
        .def("__repr__",
             [](const FingerId& f) { return "FingerId(" + std::to_string(f.value()) + ")"; });
    py::implicitly_convertible<py::int_, FingerId>();

    py::class_<WhiteIndex>(m, "WhiteIndex")
        .def(py::init<>())
        .def(py::init<int>(), py::arg("value"))
        .def_property_readonly("value", &WhiteIndex::value)
        .def("__int__", &WhiteIndex::value)
        .def(py::self == py::self)
        .def(py::self < py::self)
        .def(py::self - py::self)
        .def("__hash__", [](const WhiteIndex& w) { return std::hash<int>{}(w.value()); })
        .def("__repr__",
             [](const WhiteIndex& w) { return "WhiteIndex(" + std::to_string(w.value()) + ")"; });
    py::implicitly_convertible<py::int_, WhiteIndex>();

    py::enum_<NoteKind>(m, "NoteKind").value("On", NoteKind::On).value("Off", NoteKind::Off);

    py::class_<NoteEvent>(m, "NoteEvent")
        .def(py::init<>())
        .def(py::init([](double t, NoteKind kind, int midi_note, int velocity) {
                 return NoteEvent{t, kind, midi_note, velocity};
             }),
             py::arg("t"), py::arg("kind"), py::arg("midi_note"), py::arg("velocity"))
        .def_readwrite("t", &NoteEvent::t)
        .def_readwrite("kind", &NoteEvent::kind)
        .def_readwrite("midi_note", &NoteEvent::midi_note)
        .def_readwrite("velocity", &NoteEvent::velocity)
        .def(py::self == py::self)
        .def("__repr__", [](const NoteEvent& e) {
            std::ostringstream out;
            out << "NoteEvent(t=" << e.t << ", kind=" << (e.kind == NoteKind::On ? "On" : "Off")
                << ", midi_note=" << e.midi_note << ", velocity=" << e.velocity << ")";
            return out.str();
        });

    py::class_<SensorFrame>(m, "SensorFrame")
        .def(py::init<>())
        .def_readwrite("t", &SensorFrame::t)
        .def_readwrite("pressure", &SensorFrame::pressure)
        .def_readwrite("flex", &SensorFrame::flex)
        .def_readwrite("imu", &SensorFrame::imu);

    py::class_<SensorStream>(m, "SensorStream")
        .def(py::init<>())
        .def_readwrite("frames", &SensorStream::frames)
        .def_readwrite("nominal_rate", &SensorStream::nominal_rate)
        .def("__len__", &SensorStream::size)
        .def("empty", &SensorStream::empty);

    m.def("validate_note_event", &validate_note_event, py::arg("e"));
    m.def("is_white_key", &is_white_key, py::arg("midi_note"));
    m.def("midi_to_white_index", &midi_to_white_index, py::arg("midi_note"));
    m.def("white_index_to_midi", &white_index_to_midi, py::arg("index"));

    // --- session io ----------------------------------------------------------
    m.attr("SENSOR_CSV_HEADER") = std::string(kSensorCsvHeader);
    m.attr("NOTE_CSV_HEADER") = std::string(kNoteCsvHeader);

    py::class_<SessionMeta>(m, "SessionMeta")
        .def(py::init<>())
        .def_readwrite("name", &SessionMeta::name)
        .def_readwrite("tier", &SessionMeta::tier)
        .def_readwrite("seed", &SessionMeta::seed)
        .def_readwrite("stream_offset", &SessionMeta::stream_offset);

    py::class_<Session>(m, "Session")
        .def(py::init<>())
        .def_readwrite("sensors", &Session::sensors)
        .def_readwrite("events", &Session::events)
        .def_readwrite("meta", &Session::meta);

    py::class_<MidiMessage>(m, "MidiMessage")
        .def(py::init<>())
        .def(py::init([](int status, int data1, int data2) {
                 return MidiMessage{static_cast<std::uint8_t>(status),
                                    static_cast<std::uint8_t>(data1),
                                    static_cast<std::uint8_t>(data2)};
             }),
             py::arg("status"), py::arg("data1"), py::arg("data2"))
        .def_readwrite("status", &MidiMessage::status)
        .def_readwrite("data1", &MidiMessage::data1)
        .def_readwrite("data2", &MidiMessage::data2)
        .def(py::self == py::self)
        .def("__repr__", [](const MidiMessage& msg) {
            std::ostringstream out;
            out << "MidiMessage(status=" << int(msg.status) << ", data1=" << int(msg.data1)
                << ", data2=" << int(msg.data2) << ")";
            return out.str();
        });

    py::class_<ChannelRef> channel_ref(m, "ChannelRef");
    py::enum_<ChannelRef::Kind>(channel_ref, "Kind")
        .value("Pressure", ChannelRef::Kind::Pressure)
        .value("Flex", ChannelRef::Kind::Flex)
        .value("Imu", ChannelRef::Kind::Imu);
    channel_ref.def(py::init<>())
        .def_readwrite("kind", &ChannelRef::kind)
        .def_readwrite("index", &ChannelRef::index)
        .def_static("pressure", &ChannelRef::pressure, py::arg("i"))
        .def_static("flex", &ChannelRef::flex, py::arg("i"))
        .def_static("imu", &ChannelRef::imu, py::arg("i"))
        .def_static("thumb_flex", &ChannelRef::thumb_flex);

    m.def("format_number", &format_number, py::arg("value"));
    m.def("parse_sensor_csv", [](const std::string& s) { return parse_sensor_csv(s); },
          py::arg("text"));
    m.def("serialize_sensor_csv", &serialize_sensor_csv, py::arg("stream"));
    m.def("parse_note_csv", [](const std::string& s) { return parse_note_csv(s); },
          py::arg("text"));
    m.def("serialize_note_csv", &serialize_note_csv, py::arg("events"));
    m.def("encode_midi_message", &encode_midi_message, py::arg("e"), py::arg("channel"));
    m.def("decode_midi_message", &decode_midi_message, py::arg("m"), py::arg("t") = 0.0);
    m.def("sample_channel", &sample_channel, py::arg("frame"), py::arg("ch"));
    m.def("resample_window", &resample_window, py::arg("stream"), py::arg("ch"), py::arg("t_end"),
          py::arg("n"), py::arg("dt"));
    m.def("normalize_flex", &normalize_flex, py::arg("stream"));
    m.def("load_session", &load_session, py::arg("dir"));
    m.def("save_session", &save_session, py::arg("session"), py::arg("dir"));
    m.def(
        "serialize_midi_stream",
        [](const std::vector<NoteEvent>& events, int channel) {
            std::ostringstream out(std::ios::binary);
            write_midi_stream(out, events, channel);
            return py::bytes(out.str());
        },
        py::arg("events"), py::arg("channel") = 0,
        "Binary delta-time MIDI stream as bytes.");
    m.def(
        "parse_midi_stream",
        [](const py::bytes& data) {
            std::istringstream in(std::string(data), std::ios::binary);
            return read_midi_stream(in);
        },
        py::arg("data"));

    // --- labeling ------------------------------------------------------------
    py::class_<NoteSegment>(m, "NoteSegment")
        .def(py::init<>())
        .def_readwrite("t_on", &NoteSegment::t_on)
        .def_readwrite("t_off", &NoteSegment::t_off)
        .def_readwrite("white_index", &NoteSegment::white_index)
        .def_readwrite("velocity", &NoteSegment::velocity);

    py::class_<SegmentationResult>(m, "SegmentationResult")
        .def(py::init<>())
        .def_readwrite("segments", &SegmentationResult::segments)
        .def_readwrite("unmatched_closed", &SegmentationResult::unmatched_closed)
        .def_readwrite("orphan_offs", &SegmentationResult::orphan_offs);

    py::class_<LabeledEvent>(m, "LabeledEvent")
        .def(py::init<>())
        .def_readwrite("finger", &LabeledEvent::finger)
        .def_readwrite("white_index", &LabeledEvent::white_index)
        .def_readwrite("tu", &LabeledEvent::tu)
        .def_readwrite("flex_window", &LabeledEvent::flex_window)
        .def_readwrite("t_on", &LabeledEvent::t_on)
        .def("__repr__", [](const LabeledEvent& e) {
            std::ostringstream out;
            out << "LabeledEvent(finger=" << e.finger.value()
                << ", white_index=" << e.white_index.value() << ", tu=" << (e.tu ? "True" : "False")
                << ", t_on=" << e.t_on << ")";
            return out.str();
        });

    m.def("segment_notes", &segment_notes, py::arg("events"));
    m.def("assign_finger", &assign_finger, py::arg("stream"), py::arg("seg"));
    m.def("label_thumb_under", &label_thumb_under, py::arg("f_prev"), py::arg("f_curr"),
          py::arg("n_prev"), py::arg("n_curr"));
    m.def("build_dataset", &build_dataset, py::arg("session"), py::arg("n"), py::arg("dt"));
    m.def("serialize_dataset_csv", &serialize_dataset_csv, py::arg("events"));

    // --- simulator -----------------------------------------------------------
    m.attr("SCORE_START") = kScoreStart;
    m.attr("NOTE_SPACING") = kNoteSpacing;
    m.attr("NOTE_DURATION") = kNoteDuration;

    py::enum_<Tier>(m, "Tier")
        .value("Cdefg", Tier::Cdefg)
        .value("CdefgRand", Tier::CdefgRand)
        .value("Scales", Tier::Scales)
        .value("ScalesRand", Tier::ScalesRand)
        .value("Menuet", Tier::Menuet)
        .value("ImprovPred", Tier::ImprovPred)
        .value("ImprovNonpred", Tier::ImprovNonpred);

    m.def("to_string", static_cast<std::string (*)(Tier)>(&to_string), py::arg("tier"));
    m.def("tier_from_string", &tier_from_string, py::arg("s"));
    m.def("all_tiers", &all_tiers, py::return_value_policy::copy);

    py::class_<ScoreEntry>(m, "ScoreEntry")
        .def(py::init<>())
        .def_readwrite("white_index", &ScoreEntry::white_index)
        .def_readwrite("finger", &ScoreEntry::finger)
        .def_readwrite("t_on", &ScoreEntry::t_on)
        .def_readwrite("duration", &ScoreEntry::duration)
        .def_readwrite("velocity", &ScoreEntry::velocity);

    py::class_<Score>(m, "Score")
        .def(py::init<>())
        .def_readwrite("entries", &Score::entries)
        .def_readwrite("tier", &Score::tier)
        .def("__len__", [](const Score& s) { return s.entries.size(); });

    py::class_<NoiseParams>(m, "NoiseParams")
        .def(py::init<>())
        .def_readwrite("pressure_sigma", &NoiseParams::pressure_sigma)
        .def_readwrite("flex_sigma", &NoiseParams::flex_sigma)
        .def_readwrite("flex_drift_per_minute", &NoiseParams::flex_drift_per_minute)
        .def_readwrite("timing_jitter_sigma", &NoiseParams::timing_jitter_sigma)
        .def_readwrite("packet_loss_prob", &NoiseParams::packet_loss_prob)
        .def_readwrite("seed", &NoiseParams::seed)
        .def("validate", &NoiseParams::validate);

    m.def("score_tu_flags", &score_tu_flags, py::arg("score"));
    m.def("generate_score", &generate_score, py::arg("tier"), py::arg("num_notes"),
          py::arg("seed"));
    m.def("make_scale_score", &make_scale_score, py::arg("octaves"), py::arg("num_notes"),
          py::arg("seed"));
    m.def("noise_preset", &noise_preset, py::arg("name"));
    m.def("render_sensors", &render_sensors, py::arg("score"), py::arg("np"));

    // --- models --------------------------------------------------------------
    py::enum_<FeatureSpace>(m, "FeatureSpace")
        .value("DeltaF", FeatureSpace::DeltaF)
        .value("Pair", FeatureSpace::Pair)
        .value("PairTu", FeatureSpace::PairTu);

    m.def("to_string", static_cast<std::string (*)(FeatureSpace)>(&to_string), py::arg("fs"));
    m.def("feature_space_from_string", &feature_space_from_string, py::arg("s"));
    m.def("make_context_key", &make_context_key, py::arg("fs"), py::arg("f_prev"),
          py::arg("f_curr"), py::arg("tu"));
    m.def("context_key_label", &context_key_label, py::arg("fs"), py::arg("key"));

    py::class_<IntervalModel>(m, "IntervalModel")
        .def(py::init<>())
        .def_readwrite("feature_space", &IntervalModel::feature_space)
        .def_readwrite("support_min", &IntervalModel::support_min)
        .def_readwrite("support_max", &IntervalModel::support_max)
        .def_readwrite("alpha", &IntervalModel::alpha)
        .def_readwrite("counts", &IntervalModel::counts)
        .def_readwrite("dropped", &IntervalModel::dropped)
        .def("support_size", &IntervalModel::support_size);

    m.def("fit_interval_model", &fit_interval_model, py::arg("sequences"), py::arg("fs"),
          py::arg("support_min") = -12, py::arg("support_max") = 12, py::arg("alpha") = 1.0);
    m.def("interval_distribution", &interval_distribution, py::arg("model"), py::arg("f_prev"),
          py::arg("f_curr"), py::arg("tu"));
    m.def("interval_distribution_key", &interval_distribution_key, py::arg("model"),
          py::arg("key"));
    m.def("predict_interval", &predict_interval, py::arg("model"), py::arg("f_prev"),
          py::arg("f_curr"), py::arg("tu"));

    py::class_<TUClassifier>(m, "TUClassifier")
        .def(py::init<>())
        .def_readwrite("n", &TUClassifier::n)
        .def_readwrite("weights", &TUClassifier::weights)
        .def_readwrite("trained", &TUClassifier::trained)
        .def_readwrite("prior", &TUClassifier::prior);

    py::class_<TUTrainOptions>(m, "TUTrainOptions")
        .def(py::init<>())
        .def_readwrite("l2", &TUTrainOptions::l2)
        .def_readwrite("tol", &TUTrainOptions::tol)
        .def_readwrite("max_iter", &TUTrainOptions::max_iter);

    py::class_<TUPrediction>(m, "TUPrediction")
        .def(py::init<>())
        .def_readwrite("tu", &TUPrediction::tu)
        .def_readwrite("probability", &TUPrediction::probability);

    m.def("fit_tu_classifier", &fit_tu_classifier, py::arg("sequences"), py::arg("n"),
          py::arg("opts") = TUTrainOptions{});
    m.def(
        "predict_tu",
        [](const TUClassifier& clf, FingerId f_curr, const std::vector<double>& window) {
            return predict_tu(clf, f_curr, window);
        },
        py::arg("clf"), py::arg("f_curr"), py::arg("window"));
    m.def(
        "logistic_nll",
        [](const std::vector<double>& weights, const std::vector<std::vector<double>>& features,
           const std::vector<int>& labels, double l2) {
            return logistic_nll(weights, features, labels, l2);
        },
        py::arg("weights"), py::arg("features"), py::arg("labels"), py::arg("l2"));
    m.def(
        "logistic_nll_gradient",
        [](const std::vector<double>& weights, const std::vector<std::vector<double>>& features,
           const std::vector<int>& labels, double l2) {
            return logistic_nll_gradient(weights, features, labels, l2);
        },
        py::arg("weights"), py::arg("features"), py::arg("labels"), py::arg("l2"));

    // --- decoding ------------------------------------------------------------
    py::class_<DecoderConfig>(m, "DecoderConfig")
        .def(py::init<>())
        .def_readwrite("theta_on", &DecoderConfig::theta_on)
        .def_readwrite("theta_off", &DecoderConfig::theta_off)
        .def_readwrite("p_max", &DecoderConfig::p_max)
        .def_readwrite("debounce", &DecoderConfig::debounce)
        .def_readwrite("reference_note", &DecoderConfig::reference_note)
        .def_readwrite("range_lo", &DecoderConfig::range_lo)
        .def_readwrite("range_hi", &DecoderConfig::range_hi)
        .def("validate", &DecoderConfig::validate);

    py::class_<ModelBundle>(m, "ModelBundle")
        .def(py::init<>())
        .def_readwrite("interval", &ModelBundle::interval)
        .def_readwrite("tu", &ModelBundle::tu)
        .def_readwrite("dt", &ModelBundle::dt)
        .def_readwrite("flex_norm", &ModelBundle::flex_norm)
        .def_readwrite("flex_norm_epsilon", &ModelBundle::flex_norm_epsilon)
        .def_readwrite("decoder", &ModelBundle::decoder);

    m.def("save_model", &save_model, py::arg("bundle"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));
    m.def("model_to_json", &model_to_json, py::arg("bundle"));
    m.def("model_from_json", &model_from_json, py::arg("text"));

    py::class_<TriggerEvent>(m, "TriggerEvent")
        .def(py::init<>())
        .def_readwrite("t", &TriggerEvent::t)
        .def_readwrite("finger", &TriggerEvent::finger)
        .def_readwrite("peak_pressure", &TriggerEvent::peak_pressure)
        .def_readwrite("t_release", &TriggerEvent::t_release)
        .def("__repr__", [](const TriggerEvent& e) {
            std::ostringstream out;
            out << "TriggerEvent(t=" << e.t << ", finger=" << e.finger.value()
                << ", peak_pressure=" << e.peak_pressure << ", t_release=" << e.t_release << ")";
            return out.str();
        });

    py::class_<PredictedNote>(m, "PredictedNote")
        .def(py::init<>())
        .def_readwrite("t_on", &PredictedNote::t_on)
        .def_readwrite("t_off", &PredictedNote::t_off)
        .def_readwrite("white_index", &PredictedNote::white_index)
        .def_readwrite("velocity", &PredictedNote::velocity)
        .def_readwrite("finger", &PredictedNote::finger);

    m.def("detect_triggers", &detect_triggers, py::arg("stream"), py::arg("cfg"));
    m.def("compute_velocity", &compute_velocity, py::arg("peak"), py::arg("cfg"));
    m.def("decode_performance",
          static_cast<std::vector<PredictedNote> (*)(const SensorStream&, const IntervalModel&,
                                                     const TUClassifier&, const DecoderConfig&,
                                                     int, double)>(&decode_performance),
          py::arg("stream"), py::arg("im"), py::arg("tc"), py::arg("cfg"), py::arg("n"),
          py::arg("dt"));
    m.def("decode_performance",
          static_cast<std::vector<PredictedNote> (*)(const SensorStream&, const TUClassifier&,
                                                     const DecoderConfig&, int, double,
                                                     const IntervalFn&)>(&decode_performance),
          py::arg("stream"), py::arg("tc"), py::arg("cfg"), py::arg("n"), py::arg("dt"),
          py::arg("intervals"));
    m.def("predicted_to_events", &predicted_to_events, py::arg("notes"));

    // --- evaluation ------------------------------------------------------------
    py::class_<SplitResult>(m, "SplitResult")
        .def(py::init<>())
        .def_readwrite("train", &SplitResult::train)
        .def_readwrite("dev", &SplitResult::dev);

    py::class_<AccuracyReport>(m, "AccuracyReport")
        .def(py::init<>())
        .def_readwrite("feature_space", &AccuracyReport::feature_space)
        .def_readwrite("per_file", &AccuracyReport::per_file)
        .def_readwrite("average", &AccuracyReport::average)
        .def_readwrite("confusion", &AccuracyReport::confusion)
        .def_readwrite("row_normalized", &AccuracyReport::row_normalized)
        .def_readwrite("skipped_files", &AccuracyReport::skipped_files);

    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("tiers", &PipelineConfig::tiers)
        .def_readwrite("notes_per_tier", &PipelineConfig::notes_per_tier)
        .def_readwrite("seeds", &PipelineConfig::seeds)
        .def_readwrite("noise", &PipelineConfig::noise)
        .def_readwrite("n", &PipelineConfig::n)
        .def_readwrite("l2", &PipelineConfig::l2)
        .def_readwrite("alpha", &PipelineConfig::alpha)
        .def_readwrite("support_min", &PipelineConfig::support_min)
        .def_readwrite("support_max", &PipelineConfig::support_max)
        .def_readwrite("decoder", &PipelineConfig::decoder)
        .def_readwrite("oracle_tu", &PipelineConfig::oracle_tu);

    m.def("split_session", &split_session, py::arg("events"));
    m.def("evaluate", &evaluate, py::arg("im"), py::arg("tc"), py::arg("dev_files"),
          py::arg("oracle_tu") = false);
    m.def("accuracy_table_csv", &accuracy_table_csv, py::arg("tiers"), py::arg("acc"));
    m.def("confusion_csv", &confusion_csv, py::arg("report"), py::arg("support_min"),
          py::arg("support_max"));
    m.def("transition_csv", &transition_csv, py::arg("model"));
    m.def("parse_pipeline_config", &parse_pipeline_config, py::arg("text"));
    m.def("run_pipeline", &run_pipeline, py::arg("config"), py::arg("out_dir"));
}

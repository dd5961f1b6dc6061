// glovekit — synthetic glove-to-MIDI imitation learning toolkit.
//
// Subcommands cover the whole offline loop: gen (synthesize a session),
// label (session -> supervised dataset), train (fit interval + thumb-under
// models), eval (held-out accuracy report), play (decode a session to a
// binary MIDI stream), pipeline (the full multi-tier experiment).

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "glovekit/decode.hpp"
#include "glovekit/eval.hpp"
#include "glovekit/labeling.hpp"
#include "glovekit/simgen.hpp"

namespace {

using namespace glovekit;

constexpr double kDt = 1.0 / kDefaultSampleRate;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Labeled events of each session directory, flex channels normalized.
std::vector<std::pair<std::string, std::vector<LabeledEvent>>> load_datasets(
    const std::vector<std::string>& dirs, int n) {
    std::vector<std::pair<std::string, std::vector<LabeledEvent>>> out;
    for (const auto& dir : dirs) {
        Session session = load_session(dir);
        session.sensors = normalize_flex(session.sensors);
        out.emplace_back(dir, build_dataset(session, n, kDt));
    }
    return out;
}

int run_gen(const std::string& tier, int notes, std::uint64_t seed, const std::string& noise,
            const std::string& out_dir) {
    const Score score = generate_score(tier_from_string(tier), notes, seed);
    NoiseParams np = noise_preset(noise);
    np.seed = seed;
    const Session session = render_sensors(score, np);
    save_session(session, out_dir);
    std::cout << "wrote " << session.sensors.size() << " frames, " << session.events.size()
              << " events to " << out_dir << "\n";
    return 0;
}

int run_label(const std::string& in_dir, const std::string& out_file) {
    Session session = load_session(in_dir);
    session.sensors = normalize_flex(session.sensors);
    const auto events = build_dataset(session, 10, kDt);
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw Error("cannot write " + out_file);
    out << serialize_dataset_csv(events);
    std::cout << "wrote " << events.size() << " labeled events to " << out_file << "\n";
    return 0;
}

int run_train(const std::string& features, const std::vector<std::string>& dirs,
              const std::string& out_file, int n, double l2) {
    std::vector<std::vector<LabeledEvent>> train_seqs;
    for (const auto& [dir, events] : load_datasets(dirs, n))
        train_seqs.push_back(split_session(events).train);

    ModelBundle bundle;
    bundle.interval = fit_interval_model(train_seqs, feature_space_from_string(features));
    TUTrainOptions opts;
    opts.l2 = l2;
    bundle.tu = fit_tu_classifier(train_seqs, n, opts);
    save_model(bundle, out_file);
    std::cout << "trained " << features << " model on " << dirs.size() << " sessions -> "
              << out_file << "\n";
    return 0;
}

int run_eval(const std::string& model_file, const std::vector<std::string>& dirs,
             const std::string& out_dir) {
    const ModelBundle bundle = load_model(model_file);
    std::vector<std::pair<std::string, std::vector<LabeledEvent>>> dev_files;
    for (auto& [dir, events] : load_datasets(dirs, bundle.tu.n))
        dev_files.emplace_back(dir, split_session(events).dev);

    const AccuracyReport report = evaluate(bundle.interval, bundle.tu, dev_files);
    const std::string fs_name = to_string(report.feature_space);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path out(out_dir);
    nlohmann::json j;
    j["feature_space"] = fs_name;
    j["average"] = report.average;
    j["per_file"] = report.per_file;
    j["skipped"] = report.skipped_files;
    std::ofstream summary(out / "report.json", std::ios::binary);
    if (!summary) throw Error("cannot write " + (out / "report.json").string());
    summary << j.dump(2) << "\n";
    summary.close();

    std::ofstream conf(out / ("confusion_" + fs_name + ".csv"), std::ios::binary);
    conf << confusion_csv(report, bundle.interval.support_min, bundle.interval.support_max);
    conf.close();
    std::ofstream trans(out / ("transition_" + fs_name + ".csv"), std::ios::binary);
    trans << transition_csv(bundle.interval);
    trans.close();

    std::cout << "average accuracy " << format_number(report.average) << " over "
              << report.per_file.size() << " files -> " << out_dir << "\n";
    return 0;
}

int run_play(const std::string& model_file, const std::string& in_dir,
             const std::string& out_file) {
    const ModelBundle bundle = load_model(model_file);
    Session session = load_session(in_dir);
    session.sensors = normalize_flex(session.sensors);
    const auto notes = decode_performance(session.sensors, bundle.interval, bundle.tu,
                                          bundle.decoder, bundle.tu.n, bundle.dt);
    const auto events = predicted_to_events(notes);
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw Error("cannot write " + out_file);
    write_midi_stream(out, events, 0);
    std::cout << "decoded " << notes.size() << " notes -> " << out_file << "\n";
    return 0;
}

int run_pipeline_cmd(const std::string& config_file, const std::string& out_dir) {
    const PipelineConfig config = parse_pipeline_config(read_file(config_file));
    run_pipeline(config, out_dir);
    std::cout << "pipeline report written to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic glove-to-MIDI imitation learning toolkit"};
    app.require_subcommand(1);

    std::string tier = "scales", noise = "clean";
    int notes = 100;
    std::uint64_t seed = 0;
    std::string in_dir, out_path, model_file, config_file, features;
    std::vector<std::string> in_dirs;
    int n = 10;
    double l2 = 1e-3;

    auto* gen = app.add_subcommand("gen", "synthesize a session directory");
    gen->add_option("--tier", tier, "performance tier")->required();
    gen->add_option("--notes", notes, "number of notes")->required();
    gen->add_option("--seed", seed, "generation seed")->required();
    gen->add_option("--noise", noise, "noise preset: clean, moderate, heavy");
    gen->add_option("-o,--output", out_path, "session directory to write")->required();

    auto* label = app.add_subcommand("label", "label a session into a dataset CSV");
    label->add_option("-i,--input", in_dir, "session directory")->required();
    label->add_option("-o,--output", out_path, "dataset CSV to write")->required();

    auto* train = app.add_subcommand("train", "fit models on the first 80% of each session");
    train->add_option("--features", features, "delta_f, pair or pair_tu")->required();
    train->add_option("-i,--input", in_dirs, "session directories")->required();
    train->add_option("-o,--output", out_path, "model JSON to write")->required();
    train->add_option("--n", n, "thumb-flex window length");
    train->add_option("--l2", l2, "ridge penalty for the thumb-under classifiers");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on the last 20% of each session");
    eval_cmd->add_option("-m,--model", model_file, "model JSON")->required();
    eval_cmd->add_option("-i,--input", in_dirs, "session directories")->required();
    eval_cmd->add_option("-o,--output", out_path, "report directory")->required();

    auto* play = app.add_subcommand("play", "decode a session into a binary MIDI stream");
    play->add_option("-m,--model", model_file, "model JSON")->required();
    play->add_option("-i,--input", in_dir, "session directory")->required();
    play->add_option("-o,--output", out_path, "stream file to write")->required();

    auto* pipeline = app.add_subcommand("pipeline", "run the full multi-tier experiment");
    pipeline->add_option("-c,--config", config_file, "pipeline config JSON")->required();
    pipeline->add_option("-o,--output", out_path, "report directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen(tier, notes, seed, noise, out_path);
        if (label->parsed()) return run_label(in_dir, out_path);
        if (train->parsed()) return run_train(features, in_dirs, out_path, n, l2);
        if (eval_cmd->parsed()) return run_eval(model_file, in_dirs, out_path);
        if (play->parsed()) return run_play(model_file, in_dir, out_path);
        if (pipeline->parsed()) return run_pipeline_cmd(config_file, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

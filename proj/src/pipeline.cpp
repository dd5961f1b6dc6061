#include <fstream>
#include <set>

#include "glovekit/eval.hpp"
#include "json.hpp"

namespace glovekit {

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& key) {
    if (!j.at(key).is_number()) throw ConfigError("config: '" + key + "' must be a number");
    return j.at(key).get<double>();
}

int require_int(const json& j, const std::string& key) {
    if (!j.at(key).is_number_integer())
        throw ConfigError("config: '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

NoiseParams parse_noise(const json& j) {
    if (j.is_string()) {
        try {
            return noise_preset(j.get<std::string>());
        } catch (const ConfigError&) {
            throw ConfigError("config: 'noise' names no preset: '" + j.get<std::string>() + "'");
        }
    }
    if (!j.is_object()) throw ConfigError("config: 'noise' must be a preset name or an object");
    static const std::set<std::string> known = {"pressure_sigma", "flex_sigma",
                                                "flex_drift_per_minute", "timing_jitter_sigma",
                                                "packet_loss_prob"};
    NoiseParams np;
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ConfigError("config: unknown noise key '" + key + "'");
        if (!value.is_number()) throw ConfigError("config: noise key '" + key + "' must be a number");
    }
    if (j.contains("pressure_sigma")) np.pressure_sigma = j["pressure_sigma"].get<double>();
    if (j.contains("flex_sigma")) np.flex_sigma = j["flex_sigma"].get<double>();
    if (j.contains("flex_drift_per_minute"))
        np.flex_drift_per_minute = j["flex_drift_per_minute"].get<double>();
    if (j.contains("timing_jitter_sigma"))
        np.timing_jitter_sigma = j["timing_jitter_sigma"].get<double>();
    if (j.contains("packet_loss_prob")) np.packet_loss_prob = j["packet_loss_prob"].get<double>();
    return np;
}

DecoderConfig parse_decoder(const json& j) {
    if (!j.is_object()) throw ConfigError("config: 'decoder' must be an object");
    static const std::set<std::string> known = {"theta_on", "theta_off", "p_max",
                                                "debounce",  "reference_note", "range"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ConfigError("config: unknown decoder key '" + key + "'");
    DecoderConfig cfg;
    if (j.contains("theta_on")) cfg.theta_on = require_number(j, "theta_on");
    if (j.contains("theta_off")) cfg.theta_off = require_number(j, "theta_off");
    if (j.contains("p_max")) cfg.p_max = require_number(j, "p_max");
    if (j.contains("debounce")) cfg.debounce = require_number(j, "debounce");
    try {
        if (j.contains("reference_note")) cfg.reference_note = WhiteIndex(require_int(j, "reference_note"));
        if (j.contains("range")) {
            if (!j["range"].is_array() || j["range"].size() != 2)
                throw ConfigError("config: decoder 'range' must be [lo, hi]");
            cfg.range_lo = WhiteIndex(j["range"][0].get<int>());
            cfg.range_hi = WhiteIndex(j["range"][1].get<int>());
        }
    } catch (const RangeError& e) {
        throw ConfigError("config: decoder: " + std::string(e.what()));
    }
    return cfg;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

json noise_to_json(const NoiseParams& np) {
    return {{"pressure_sigma", np.pressure_sigma},
            {"flex_sigma", np.flex_sigma},
            {"flex_drift_per_minute", np.flex_drift_per_minute},
            {"timing_jitter_sigma", np.timing_jitter_sigma},
            {"packet_loss_prob", np.packet_loss_prob}};
}

json decoder_to_json(const DecoderConfig& cfg) {
    return {{"theta_on", cfg.theta_on},
            {"theta_off", cfg.theta_off},
            {"p_max", cfg.p_max},
            {"debounce", cfg.debounce},
            {"reference_note", cfg.reference_note.value()},
            {"range", {cfg.range_lo.value(), cfg.range_hi.value()}}};
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    static const std::set<std::string> known = {"tiers", "notes_per_tier", "seeds",   "noise",
                                                "n",     "l2",             "alpha",   "support",
                                                "decoder", "oracle_tu"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ConfigError("config: unknown key '" + key + "'");

    PipelineConfig cfg;
    try {
        if (j.contains("tiers")) {
            if (!j["tiers"].is_array() || j["tiers"].empty())
                throw ConfigError("config: 'tiers' must be a non-empty array");
            cfg.tiers.clear();
            for (const auto& t : j["tiers"]) {
                try {
                    cfg.tiers.push_back(tier_from_string(t.get<std::string>()));
                } catch (const UnknownTierError& e) {
                    throw ConfigError("config: 'tiers': " + std::string(e.what()));
                }
            }
        }
        if (j.contains("notes_per_tier")) cfg.notes_per_tier = require_int(j, "notes_per_tier");
        if (j.contains("seeds")) {
            if (!j["seeds"].is_array() || j["seeds"].empty())
                throw ConfigError("config: 'seeds' must be a non-empty array");
            cfg.seeds.clear();
            for (const auto& s : j["seeds"]) {
                if (!s.is_number_integer()) throw ConfigError("config: 'seeds' must hold integers");
                cfg.seeds.push_back(s.get<std::uint64_t>());
            }
        }
        if (j.contains("noise")) cfg.noise = parse_noise(j["noise"]);
        if (j.contains("n")) cfg.n = require_int(j, "n");
        if (j.contains("l2")) cfg.l2 = require_number(j, "l2");
        if (j.contains("alpha")) cfg.alpha = require_number(j, "alpha");
        if (j.contains("support")) {
            if (!j["support"].is_array() || j["support"].size() != 2)
                throw ConfigError("config: 'support' must be [lo, hi]");
            cfg.support_min = j["support"][0].get<int>();
            cfg.support_max = j["support"][1].get<int>();
        }
        if (j.contains("decoder")) cfg.decoder = parse_decoder(j["decoder"]);
        if (j.contains("oracle_tu")) {
            if (!j["oracle_tu"].is_boolean())
                throw ConfigError("config: 'oracle_tu' must be a boolean");
            cfg.oracle_tu = j["oracle_tu"].get<bool>();
        }
    } catch (const json::exception& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }

    if (cfg.notes_per_tier < 2) throw ConfigError("config: 'notes_per_tier' must be >= 2");
    if (cfg.n < 1) throw ConfigError("config: 'n' must be >= 1");
    if (cfg.l2 < 0) throw ConfigError("config: 'l2' must be >= 0");
    if (cfg.alpha < 0) throw ConfigError("config: 'alpha' must be >= 0");
    if (cfg.support_min > cfg.support_max)
        throw ConfigError("config: 'support' must satisfy lo <= hi");
    if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size())
        throw ConfigError("config: 'seeds' must be distinct");
    if (std::set<Tier>(cfg.tiers.begin(), cfg.tiers.end()).size() != cfg.tiers.size())
        throw ConfigError("config: 'tiers' must be distinct");
    try {
        cfg.noise.validate();
        cfg.decoder.validate();
    } catch (const RangeError& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    return cfg;
}

void run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir) {
    if (config.tiers.empty()) throw ConfigError("config: 'tiers' must not be empty");
    if (config.seeds.empty()) throw ConfigError("config: 'seeds' must not be empty");
    if (config.notes_per_tier < 2) throw ConfigError("config: 'notes_per_tier' must be >= 2");
    if (config.n < 1) throw ConfigError("config: 'n' must be >= 1");
    config.noise.validate();
    config.decoder.validate();

    const double dt = 1.0 / kDefaultSampleRate;

    struct FileEntry {
        std::string name;
        std::string tier;
        SplitResult split;
    };
    std::vector<FileEntry> files;
    std::vector<std::vector<LabeledEvent>> train_seqs;
    for (const Tier tier : config.tiers) {
        for (const std::uint64_t seed : config.seeds) {
            const Score score = generate_score(tier, config.notes_per_tier, seed);
            NoiseParams np = config.noise;
            np.seed = seed;
            Session session = render_sensors(score, np);
            session.sensors = normalize_flex(session.sensors);
            auto events = build_dataset(session, config.n, dt);
            auto split = split_session(events);
            train_seqs.push_back(split.train);
            files.push_back({session.meta.name, to_string(tier), std::move(split)});
        }
    }

    TUTrainOptions opts;
    opts.l2 = config.l2;
    const TUClassifier tc = fit_tu_classifier(train_seqs, config.n, opts);

    std::vector<std::pair<std::string, std::vector<LabeledEvent>>> dev_files;
    for (const auto& f : files) dev_files.emplace_back(f.name, f.split.dev);

    static const std::array<FeatureSpace, 3> spaces = {FeatureSpace::DeltaF, FeatureSpace::Pair,
                                                       FeatureSpace::PairTu};
    std::map<std::string, ModelBundle> bundles;
    std::map<std::string, AccuracyReport> reports;
    for (const FeatureSpace fs : spaces) {
        ModelBundle bundle;
        bundle.interval = fit_interval_model(train_seqs, fs, config.support_min,
                                             config.support_max, config.alpha);
        bundle.tu = tc;
        bundle.dt = dt;
        bundle.decoder = config.decoder;
        reports[to_string(fs)] = evaluate(bundle.interval, tc, dev_files, config.oracle_tu);
        bundles[to_string(fs)] = std::move(bundle);
    }

    // Tier rows of the accuracy table: unweighted mean over the tier's files.
    std::vector<std::string> tier_names;
    for (const Tier tier : config.tiers) tier_names.push_back(to_string(tier));
    std::map<std::string, std::map<std::string, double>> table;
    for (const auto& [fs_name, report] : reports) {
        for (const auto& tier_name : tier_names) {
            double sum = 0.0;
            int count = 0;
            for (const auto& f : files) {
                if (f.tier != tier_name) continue;
                const auto it = report.per_file.find(f.name);
                if (it == report.per_file.end()) continue;  // skipped: too short
                sum += it->second;
                ++count;
            }
            if (count == 0)
                throw ConfigError("tier '" + tier_name +
                                  "' has no evaluable dev data; increase notes_per_tier");
            table[tier_name][fs_name] = sum / count;
        }
    }

    std::filesystem::create_directories(out_dir);

    json report_json;
    report_json["config"] = {{"tiers", tier_names},
                             {"notes_per_tier", config.notes_per_tier},
                             {"seeds", config.seeds},
                             {"noise", noise_to_json(config.noise)},
                             {"n", config.n},
                             {"l2", config.l2},
                             {"alpha", config.alpha},
                             {"support", {config.support_min, config.support_max}},
                             {"decoder", decoder_to_json(config.decoder)},
                             {"oracle_tu", config.oracle_tu}};
    json files_json = json::object();
    for (const auto& f : files)
        files_json[f.name] = {{"tier", f.tier},
                              {"train_events", f.split.train.size()},
                              {"dev_events", f.split.dev.size()}};
    report_json["files"] = std::move(files_json);
    json results = json::object();
    for (const auto& [fs_name, report] : reports) {
        json r;
        r["average"] = report.average;
        r["per_file"] = report.per_file;
        json per_tier = json::object();
        for (const auto& tier_name : tier_names) per_tier[tier_name] = table[tier_name][fs_name];
        r["per_tier"] = std::move(per_tier);
        r["skipped"] = report.skipped_files;
        results[fs_name] = std::move(r);
    }
    report_json["results"] = std::move(results);

    write_text(out_dir / "report.json", report_json.dump(2) + "\n");
    write_text(out_dir / "accuracy_table.csv", accuracy_table_csv(tier_names, table));
    for (const FeatureSpace fs : spaces) {
        const std::string name = to_string(fs);
        write_text(out_dir / ("confusion_" + name + ".csv"),
                   confusion_csv(reports[name], config.support_min, config.support_max));
        write_text(out_dir / ("transition_" + name + ".csv"),
                   transition_csv(bundles[name].interval));
        save_model(bundles[name], out_dir / ("model_" + name + ".json"));
    }
}

}  // namespace glovekit

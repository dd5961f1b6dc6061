#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "glovekit/models.hpp"
#include "glovekit/simgen.hpp"

namespace glovekit {

struct SplitResult {
    std::vector<LabeledEvent> train;
    std::vector<LabeledEvent> dev;
};

/// Chronological 80/20 split: train = first floor(0.8 * len) events, dev the
/// rest, order preserved. A single-event list yields an empty train side and
/// a warning on stderr.
SplitResult split_session(const std::vector<LabeledEvent>& events);

/// Per-file and averaged interval-prediction accuracy for one feature space.
struct AccuracyReport {
    FeatureSpace feature_space = FeatureSpace::Pair;
    std::map<std::string, double> per_file;              // file -> accuracy in [0,1]
    double average = 0.0;                                // unweighted mean over files
    std::map<std::pair<int, int>, std::int64_t> confusion;  // (true dN, predicted dN)
    std::map<std::pair<int, int>, double> row_normalized;   // rows sum to 1
    std::vector<std::string> skipped_files;              // fewer than 2 events
};

/// Scores predicted intervals against true intervals on each dev file
/// separately. The thumb-under feature is the classifier's own prediction
/// unless oracle_tu is set. Files without transitions are skipped with a
/// warning; throws EmptyDevError when nothing remains.
AccuracyReport evaluate(const IntervalModel& im, const TUClassifier& tc,
                        const std::vector<std::pair<std::string, std::vector<LabeledEvent>>>& dev_files,
                        bool oracle_tu = false);

/// `tier,delta_f,pair,pair_tu` rows in the given tier order plus a final
/// `average` row holding the column means.
std::string accuracy_table_csv(const std::vector<std::string>& tiers,
                               const std::map<std::string, std::map<std::string, double>>& acc);

/// Row-normalized confusion matrix over the full interval support; rows with
/// no observations stay zero.
std::string confusion_csv(const AccuracyReport& report, int support_min, int support_max);

/// Laplace-smoothed P(dN | context) over the feature space's whole context
/// domain; every row sums to 1.
std::string transition_csv(const IntervalModel& model);

/// Experiment description consumed by run_pipeline and the pipeline CLI.
struct PipelineConfig {
    std::vector<Tier> tiers = all_tiers();
    int notes_per_tier = 100;
    std::vector<std::uint64_t> seeds = {1};
    NoiseParams noise = noise_preset("moderate");  // per-session seed is the session seed
    int n = 10;
    double l2 = 1e-3;
    double alpha = 1.0;
    int support_min = -12;
    int support_max = 12;
    DecoderConfig decoder;
    bool oracle_tu = false;
};

/// Parses the pipeline JSON config. Unknown keys and type mismatches raise
/// ConfigError naming the offending key.
PipelineConfig parse_pipeline_config(const std::string& text);

/// Runs the full experiment: generates one session per (tier, seed), labels,
/// splits 80/20, trains the three interval models and the TU classifier on
/// the combined training halves, evaluates every dev file, and writes
/// report.json, accuracy_table.csv, confusion_<fs>.csv, transition_<fs>.csv
/// and model_<fs>.json into out_dir. Single-threaded and deterministic:
/// identical config produces byte-identical artifacts.
void run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir);

}  // namespace glovekit

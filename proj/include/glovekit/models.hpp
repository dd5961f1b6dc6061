#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "glovekit/decode_config.hpp"
#include "glovekit/labeling.hpp"

namespace glovekit {

/// Conditioning context for the interval model, in increasing order of detail.
enum class FeatureSpace { DeltaF, Pair, PairTu };

std::string to_string(FeatureSpace fs);
FeatureSpace feature_space_from_string(const std::string& s);

/// Canonical key for one conditioning context. Layout depends on the feature
/// space: {df,0,0} for DeltaF, {f_prev,f_curr,0} for Pair,
/// {f_prev,f_curr,tu} for PairTu.
using ContextKey = std::array<int, 3>;

ContextKey make_context_key(FeatureSpace fs, FingerId f_prev, FingerId f_curr, bool tu);

/// Context label used in model JSON and report CSVs: the delta for DeltaF
/// ("-2"), "fp,fc" for Pair, "fp,fc,tu" for PairTu.
std::string context_key_label(FeatureSpace fs, const ContextKey& key);

/// Conditional count table P(dN | context) over white-key intervals.
struct IntervalModel {
    FeatureSpace feature_space = FeatureSpace::Pair;
    int support_min = -12;
    int support_max = 12;
    double alpha = 1.0;  // Laplace pseudo-count for reported distributions
    std::map<ContextKey, std::map<int, std::int64_t>> counts;
    std::int64_t dropped = 0;  // transitions outside the support, skipped at fit

    int support_size() const { return support_max - support_min + 1; }
};

/// Counts every consecutive (prev, curr) pair of each sequence into the
/// context given by the feature space. Intervals outside the support are
/// dropped (counted in .dropped). Throws EmptyDataError when no sequences
/// are given; sequences shorter than 2 contribute nothing.
IntervalModel fit_interval_model(const std::vector<std::vector<LabeledEvent>>& sequences,
                                 FeatureSpace fs, int support_min = -12, int support_max = 12,
                                 double alpha = 1.0);

/// Laplace-smoothed distribution over the support for the model's own context
/// of (f_prev, f_curr, tu): (count + alpha) / (total + alpha * |support|).
/// Uniform for contexts with no counts. Entries sum to 1 within 1e-12.
std::vector<double> interval_distribution(const IntervalModel& model, FingerId f_prev,
                                          FingerId f_curr, bool tu);

/// Same, addressed by an explicit context key of the model's feature space.
std::vector<double> interval_distribution_key(const IntervalModel& model, const ContextKey& key);

/// Most frequent interval for the context, by raw counts. When the model's own
/// context is empty, backs off through coarser contexts
/// (pair_tu -> pair -> delta_f -> global) and finally falls back to
/// dN = f_curr - f_prev. Ties break toward smaller |dN|, then the positive sign.
int predict_interval(const IntervalModel& model, FingerId f_prev, FingerId f_curr, bool tu);

/// Five per-finger binary logistic classifiers over the thumb-flex window.
/// Weight vectors have length n+1; the last entry is the unregularized bias.
struct TUClassifier {
    int n = 10;
    std::array<std::vector<double>, 5> weights{};
    std::array<bool, 5> trained{};
    std::array<double, 5> prior{};  // fraction of thumb-under labels seen per finger
};

struct TUTrainOptions {
    double l2 = 1e-3;     // ridge penalty on the non-bias weights
    double tol = 1e-6;    // stop when the gradient infinity-norm drops below
    int max_iter = 1000;
};

/// Fits one classifier per finger on all events played by that finger.
/// Deterministic full-batch gradient descent with backtracking line search.
/// Fingers with no data or a single label class keep zero weights and
/// trained = false. Throws DimensionMismatchError on a window of wrong length.
TUClassifier fit_tu_classifier(const std::vector<std::vector<LabeledEvent>>& sequences, int n,
                               const TUTrainOptions& opts = {});

struct TUPrediction {
    bool tu = false;
    double probability = 0.0;
};

/// p = sigma(w . [window, 1]); predicts thumb-under when p >= 0.5. An
/// untrained finger answers with its training-label prior (0 when unseen).
TUPrediction predict_tu(const TUClassifier& clf, FingerId f_curr, std::span<const double> window);

/// L2-regularized logistic negative log-likelihood. Rows of features must
/// carry the trailing bias column; the bias weight is not penalized.
double logistic_nll(std::span<const double> weights, const std::vector<std::vector<double>>& features,
                    const std::vector<int>& labels, double l2);

/// Analytic gradient of logistic_nll, checked against finite differences in the tests.
std::vector<double> logistic_nll_gradient(std::span<const double> weights,
                                          const std::vector<std::vector<double>>& features,
                                          const std::vector<int>& labels, double l2);

/// Everything needed to decode a new stream: the interval model, the
/// thumb-under classifiers, the feature-window geometry, the flex
/// normalization convention, and the trigger thresholds.
struct ModelBundle {
    IntervalModel interval;
    TUClassifier tu;
    double dt = 1.0 / kDefaultSampleRate;  // window step in seconds
    std::string flex_norm = "median_std";
    double flex_norm_epsilon = 1e-6;
    DecoderConfig decoder;
};

/// JSON persistence; save/load round-trips every field exactly.
void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

std::string model_to_json(const ModelBundle& bundle);
ModelBundle model_from_json(const std::string& text);

}  // namespace glovekit

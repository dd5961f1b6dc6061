#include "glovekit/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace glovekit {

std::string to_string(FeatureSpace fs) {
    switch (fs) {
        case FeatureSpace::DeltaF: return "delta_f";
        case FeatureSpace::Pair: return "pair";
        case FeatureSpace::PairTu: return "pair_tu";
    }
    throw RangeError("bad feature space");
}

FeatureSpace feature_space_from_string(const std::string& s) {
    if (s == "delta_f") return FeatureSpace::DeltaF;
    if (s == "pair") return FeatureSpace::Pair;
    if (s == "pair_tu") return FeatureSpace::PairTu;
    throw RangeError("unknown feature space '" + s + "'");
}

ContextKey make_context_key(FeatureSpace fs, FingerId f_prev, FingerId f_curr, bool tu) {
    switch (fs) {
        case FeatureSpace::DeltaF: return {f_curr.value() - f_prev.value(), 0, 0};
        case FeatureSpace::Pair: return {f_prev.value(), f_curr.value(), 0};
        case FeatureSpace::PairTu: return {f_prev.value(), f_curr.value(), tu ? 1 : 0};
    }
    throw RangeError("bad feature space");
}

IntervalModel fit_interval_model(const std::vector<std::vector<LabeledEvent>>& sequences,
                                 FeatureSpace fs, int support_min, int support_max, double alpha) {
    if (sequences.empty()) throw EmptyDataError("no training sequences");
    if (support_min > support_max) throw RangeError("empty interval support");
    if (alpha < 0.0) throw RangeError("alpha must be >= 0");

    IntervalModel model;
    model.feature_space = fs;
    model.support_min = support_min;
    model.support_max = support_max;
    model.alpha = alpha;

    for (const auto& seq : sequences) {
        for (std::size_t i = 1; i < seq.size(); ++i) {
            const auto& prev = seq[i - 1];
            const auto& curr = seq[i];
            const int dn = curr.white_index - prev.white_index;
            if (dn < support_min || dn > support_max) {
                ++model.dropped;
                continue;
            }
            const ContextKey key = make_context_key(fs, prev.finger, curr.finger, curr.tu);
            ++model.counts[key][dn];
        }
    }
    return model;
}

namespace {

// Counts aggregated to one backoff level. Levels are the model's own feature
// space and everything coarser; Global sums the whole table.
enum class BackoffLevel { PairTu, Pair, DeltaF, Global };

std::map<int, std::int64_t> counts_at_level(const IntervalModel& model, BackoffLevel level,
                                            FingerId f_prev, FingerId f_curr, bool tu) {
    std::map<int, std::int64_t> out;
    const int df = f_curr.value() - f_prev.value();
    for (const auto& [key, dist] : model.counts) {
        bool match = false;
        switch (level) {
            case BackoffLevel::PairTu:
                match = key == ContextKey{f_prev.value(), f_curr.value(), tu ? 1 : 0};
                break;
            case BackoffLevel::Pair:
                match = key[0] == f_prev.value() && key[1] == f_curr.value();
                break;
            case BackoffLevel::DeltaF:
                match = model.feature_space == FeatureSpace::DeltaF ? key[0] == df
                                                                    : key[1] - key[0] == df;
                break;
            case BackoffLevel::Global:
                match = true;
                break;
        }
        if (!match) continue;
        for (const auto& [dn, c] : dist) out[dn] += c;
    }
    return out;
}

std::vector<BackoffLevel> backoff_chain(FeatureSpace fs) {
    switch (fs) {
        case FeatureSpace::PairTu:
            return {BackoffLevel::PairTu, BackoffLevel::Pair, BackoffLevel::DeltaF,
                    BackoffLevel::Global};
        case FeatureSpace::Pair:
            return {BackoffLevel::Pair, BackoffLevel::DeltaF, BackoffLevel::Global};
        case FeatureSpace::DeltaF:
            return {BackoffLevel::DeltaF, BackoffLevel::Global};
    }
    throw RangeError("bad feature space");
}

// Smaller |dN| wins a count tie; the positive sign wins an |dN| tie.
bool better_tie(int candidate, int incumbent) {
    if (std::abs(candidate) != std::abs(incumbent)) return std::abs(candidate) < std::abs(incumbent);
    return candidate > incumbent;
}

}  // namespace

std::vector<double> interval_distribution_key(const IntervalModel& model, const ContextKey& key) {
    const int size = model.support_size();
    std::vector<double> probs(static_cast<std::size_t>(size), 0.0);

    std::int64_t total = 0;
    const auto it = model.counts.find(key);
    if (it != model.counts.end())
        for (const auto& [dn, c] : it->second) total += c;

    const double denom = static_cast<double>(total) + model.alpha * static_cast<double>(size);
    if (denom <= 0.0) {
        // alpha = 0 and an unseen context: report uniform so rows always normalize
        std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(size));
        return probs;
    }
    for (int dn = model.support_min; dn <= model.support_max; ++dn) {
        std::int64_t c = 0;
        if (it != model.counts.end()) {
            const auto cit = it->second.find(dn);
            if (cit != it->second.end()) c = cit->second;
        }
        probs[static_cast<std::size_t>(dn - model.support_min)] =
            (static_cast<double>(c) + model.alpha) / denom;
    }
    return probs;
}

std::vector<double> interval_distribution(const IntervalModel& model, FingerId f_prev,
                                          FingerId f_curr, bool tu) {
    return interval_distribution_key(model, make_context_key(model.feature_space, f_prev, f_curr, tu));
}

int predict_interval(const IntervalModel& model, FingerId f_prev, FingerId f_curr, bool tu) {
    for (const BackoffLevel level : backoff_chain(model.feature_space)) {
        const auto counts = counts_at_level(model, level, f_prev, f_curr, tu);
        std::int64_t best_count = 0;
        int best_dn = 0;
        bool found = false;
        for (const auto& [dn, c] : counts) {
            if (c <= 0) continue;
            if (!found || c > best_count || (c == best_count && better_tie(dn, best_dn))) {
                best_count = c;
                best_dn = dn;
                found = true;
            }
        }
        if (found) return best_dn;
    }
    // Nothing learned anywhere: assume the one-to-one finger-to-key mapping.
    return f_curr.value() - f_prev.value();
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double logistic_nll(std::span<const double> weights, const std::vector<std::vector<double>>& features,
                    const std::vector<int>& labels, double l2) {
    double nll = 0.0;
    for (std::size_t r = 0; r < features.size(); ++r) {
        const double z = dot(weights, features[r]);
        // log(1 + exp(z)) - y*z, computed in the numerically stable branch
        const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        nll += softplus - (labels[r] != 0 ? z : 0.0);
    }
    for (std::size_t j = 0; j + 1 < weights.size(); ++j)  // bias unregularized
        nll += 0.5 * l2 * weights[j] * weights[j];
    return nll;
}

std::vector<double> logistic_nll_gradient(std::span<const double> weights,
                                          const std::vector<std::vector<double>>& features,
                                          const std::vector<int>& labels, double l2) {
    std::vector<double> grad(weights.size(), 0.0);
    for (std::size_t r = 0; r < features.size(); ++r) {
        const double err = sigmoid(dot(weights, features[r])) - (labels[r] != 0 ? 1.0 : 0.0);
        for (std::size_t j = 0; j < weights.size(); ++j) grad[j] += err * features[r][j];
    }
    for (std::size_t j = 0; j + 1 < weights.size(); ++j) grad[j] += l2 * weights[j];
    return grad;
}

namespace {

std::vector<double> fit_logistic(const std::vector<std::vector<double>>& features,
                                 const std::vector<int>& labels, const TUTrainOptions& opts) {
    const std::size_t dim = features.front().size();
    std::vector<double> w(dim, 0.0);
    double f = logistic_nll(w, features, labels, opts.l2);

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        const auto grad = logistic_nll_gradient(w, features, labels, opts.l2);
        double g_inf = 0.0, g_sq = 0.0;
        for (double g : grad) {
            g_inf = std::max(g_inf, std::abs(g));
            g_sq += g * g;
        }
        if (g_inf < opts.tol) break;

        // Backtracking line search (Armijo) along the steepest descent direction.
        constexpr double kShrink = 0.5, kArmijo = 1e-4;
        double step = 1.0 / std::max(1.0, static_cast<double>(features.size()) / 8.0);
        std::vector<double> trial(dim);
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t j = 0; j < dim; ++j) trial[j] = w[j] - step * grad[j];
            const double f_trial = logistic_nll(trial, features, labels, opts.l2);
            if (f_trial <= f - kArmijo * step * g_sq) {
                w = trial;
                f = f_trial;
                accepted = true;
                break;
            }
            step *= kShrink;
        }
        if (!accepted) break;  // no descent step representable; converged numerically
    }
    return w;
}

}  // namespace

TUClassifier fit_tu_classifier(const std::vector<std::vector<LabeledEvent>>& sequences, int n,
                               const TUTrainOptions& opts) {
    if (n < 1) throw RangeError("window length must be >= 1");
    TUClassifier clf;
    clf.n = n;
    for (auto& w : clf.weights) w.assign(static_cast<std::size_t>(n) + 1, 0.0);

    for (int finger = 1; finger <= kNumFingers; ++finger) {
        std::vector<std::vector<double>> features;
        std::vector<int> labels;
        for (const auto& seq : sequences) {
            for (const auto& ev : seq) {
                if (ev.finger.value() != finger) continue;
                if (static_cast<int>(ev.flex_window.size()) != n)
                    throw DimensionMismatchError("flex window has length " +
                                                 std::to_string(ev.flex_window.size()) +
                                                 ", expected " + std::to_string(n));
                std::vector<double> row = ev.flex_window;
                row.push_back(1.0);  // bias column
                features.push_back(std::move(row));
                labels.push_back(ev.tu ? 1 : 0);
            }
        }
        const std::size_t idx = static_cast<std::size_t>(finger - 1);
        if (labels.empty()) continue;  // no data: zero weights, prior 0, untrained

        const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
        clf.prior[idx] = static_cast<double>(positives) / static_cast<double>(labels.size());
        if (positives == 0 || positives == labels.size()) continue;  // single class: untrained

        clf.weights[idx] = fit_logistic(features, labels, opts);
        clf.trained[idx] = true;
    }
    return clf;
}

TUPrediction predict_tu(const TUClassifier& clf, FingerId f_curr, std::span<const double> window) {
    if (static_cast<int>(window.size()) != clf.n)
        throw DimensionMismatchError("flex window has length " + std::to_string(window.size()) +
                                     ", expected " + std::to_string(clf.n));
    const std::size_t idx = static_cast<std::size_t>(f_curr.value() - 1);
    if (!clf.trained[idx]) {
        // Degenerate finger: answer the training-label prior (majority class).
        const double p = clf.prior[idx];
        return {p >= 0.5, p};
    }
    const auto& w = clf.weights[idx];
    double z = w.back();
    for (std::size_t i = 0; i < window.size(); ++i) z += w[i] * window[i];
    const double p = sigmoid(z);
    return {p >= 0.5, p};
}

std::string context_key_label(FeatureSpace fs, const ContextKey& key) {
    switch (fs) {
        case FeatureSpace::DeltaF: return std::to_string(key[0]);
        case FeatureSpace::Pair: return std::to_string(key[0]) + "," + std::to_string(key[1]);
        case FeatureSpace::PairTu:
            return std::to_string(key[0]) + "," + std::to_string(key[1]) + "," +
                   std::to_string(key[2]);
    }
    throw RangeError("bad feature space");
}

namespace {

int parse_key_int(const std::string& s) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw FormatError("bad integer key '" + s + "'");
    return value;
}

ContextKey context_key_from_string(FeatureSpace fs, const std::string& s) {
    ContextKey key{0, 0, 0};
    std::size_t pos = 0;
    int parts = fs == FeatureSpace::DeltaF ? 1 : (fs == FeatureSpace::Pair ? 2 : 3);
    for (int i = 0; i < parts; ++i) {
        const std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos && i + 1 < parts)
            throw FormatError("bad context key '" + s + "'");
        const std::string field =
            comma == std::string::npos ? s.substr(pos) : s.substr(pos, comma - pos);
        key[static_cast<std::size_t>(i)] = parse_key_int(field);
        pos = comma + 1;
    }
    return key;
}

}  // namespace

std::string model_to_json(const ModelBundle& bundle) {
    nlohmann::json j;
    j["feature_space"] = to_string(bundle.interval.feature_space);
    j["support"] = {bundle.interval.support_min, bundle.interval.support_max};
    j["alpha"] = bundle.interval.alpha;

    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [key, dist] : bundle.interval.counts) {
        nlohmann::json row = nlohmann::json::object();
        for (const auto& [dn, c] : dist) row[std::to_string(dn)] = c;
        counts[context_key_label(bundle.interval.feature_space, key)] = std::move(row);
    }
    j["counts"] = std::move(counts);

    j["tu_weights"] = bundle.tu.weights;
    j["tu_trained"] = bundle.tu.trained;
    j["tu_prior"] = bundle.tu.prior;
    j["n"] = bundle.tu.n;
    j["dt"] = bundle.dt;
    j["normalization"] = {{"flex", bundle.flex_norm}, {"epsilon", bundle.flex_norm_epsilon}};
    j["decoder"] = {{"theta_on", bundle.decoder.theta_on},
                    {"theta_off", bundle.decoder.theta_off},
                    {"p_max", bundle.decoder.p_max},
                    {"debounce", bundle.decoder.debounce},
                    {"reference_note", bundle.decoder.reference_note.value()},
                    {"range", {bundle.decoder.range_lo.value(), bundle.decoder.range_hi.value()}}};
    return j.dump(2) + "\n";
}

ModelBundle model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("model json: " + std::string(e.what()));
    }
    ModelBundle b;
    try {
        b.interval.feature_space = feature_space_from_string(j.at("feature_space").get<std::string>());
        b.interval.support_min = j.at("support").at(0).get<int>();
        b.interval.support_max = j.at("support").at(1).get<int>();
        b.interval.alpha = j.at("alpha").get<double>();
        for (const auto& [key_str, row] : j.at("counts").items()) {
            const ContextKey key = context_key_from_string(b.interval.feature_space, key_str);
            for (const auto& [dn_str, c] : row.items())
                b.interval.counts[key][parse_key_int(dn_str)] = c.get<std::int64_t>();
        }
        b.tu.weights = j.at("tu_weights").get<std::array<std::vector<double>, 5>>();
        b.tu.trained = j.at("tu_trained").get<std::array<bool, 5>>();
        b.tu.prior = j.at("tu_prior").get<std::array<double, 5>>();
        b.tu.n = j.at("n").get<int>();
        b.dt = j.at("dt").get<double>();
        b.flex_norm = j.at("normalization").at("flex").get<std::string>();
        b.flex_norm_epsilon = j.at("normalization").at("epsilon").get<double>();
        const auto& dec = j.at("decoder");
        b.decoder.theta_on = dec.at("theta_on").get<double>();
        b.decoder.theta_off = dec.at("theta_off").get<double>();
        b.decoder.p_max = dec.at("p_max").get<double>();
        b.decoder.debounce = dec.at("debounce").get<double>();
        b.decoder.reference_note = WhiteIndex(dec.at("reference_note").get<int>());
        b.decoder.range_lo = WhiteIndex(dec.at("range").at(0).get<int>());
        b.decoder.range_hi = WhiteIndex(dec.at("range").at(1).get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("model json: " + std::string(e.what()));
    }
    return b;
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
    std::string text = model_to_json(bundle);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

ModelBundle load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace glovekit

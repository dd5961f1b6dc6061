#include "glovekit/eval.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace glovekit {

SplitResult split_session(const std::vector<LabeledEvent>& events) {
    const auto cut = static_cast<std::size_t>(
        std::floor(0.8 * static_cast<double>(events.size())));
    if (events.size() == 1)
        std::cerr << "warning: single-event session splits 0/1\n";
    SplitResult split;
    split.train.assign(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(cut));
    split.dev.assign(events.begin() + static_cast<std::ptrdiff_t>(cut), events.end());
    return split;
}

AccuracyReport evaluate(const IntervalModel& im, const TUClassifier& tc,
                        const std::vector<std::pair<std::string, std::vector<LabeledEvent>>>& dev_files,
                        bool oracle_tu) {
    AccuracyReport report;
    report.feature_space = im.feature_space;

    for (const auto& [name, events] : dev_files) {
        if (events.size() < 2) {
            std::cerr << "warning: skipping '" << name << "': no transitions to evaluate\n";
            report.skipped_files.push_back(name);
            continue;
        }
        std::int64_t correct = 0;
        for (std::size_t i = 1; i < events.size(); ++i) {
            const auto& prev = events[i - 1];
            const auto& curr = events[i];
            const bool tu =
                oracle_tu ? curr.tu : predict_tu(tc, curr.finger, curr.flex_window).tu;
            const int predicted = predict_interval(im, prev.finger, curr.finger, tu);
            const int truth = curr.white_index - prev.white_index;
            if (predicted == truth) ++correct;
            ++report.confusion[{truth, predicted}];
        }
        report.per_file[name] =
            static_cast<double>(correct) / static_cast<double>(events.size() - 1);
    }
    if (report.per_file.empty()) throw EmptyDevError("no dev transitions to evaluate");

    for (const auto& [name, acc] : report.per_file) report.average += acc;
    report.average /= static_cast<double>(report.per_file.size());

    std::map<int, std::int64_t> row_totals;
    for (const auto& [key, c] : report.confusion) row_totals[key.first] += c;
    for (const auto& [key, c] : report.confusion)
        report.row_normalized[key] =
            static_cast<double>(c) / static_cast<double>(row_totals[key.first]);
    return report;
}

std::string accuracy_table_csv(const std::vector<std::string>& tiers,
                               const std::map<std::string, std::map<std::string, double>>& acc) {
    static const std::array<std::string, 3> columns = {"delta_f", "pair", "pair_tu"};
    std::ostringstream out;
    out << "tier,delta_f,pair,pair_tu\n";
    std::array<double, 3> sums{};
    for (const auto& tier : tiers) {
        out << tier;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const double v = acc.at(tier).at(columns[c]);
            sums[c] += v;
            out << ',' << format_number(v);
        }
        out << '\n';
    }
    out << "average";
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << ',' << format_number(sums[c] / static_cast<double>(tiers.size()));
    out << '\n';
    return out.str();
}

std::string confusion_csv(const AccuracyReport& report, int support_min, int support_max) {
    std::ostringstream out;
    out << "true_dn";
    for (int p = support_min; p <= support_max; ++p) out << ',' << p;
    out << '\n';
    for (int t = support_min; t <= support_max; ++t) {
        out << t;
        for (int p = support_min; p <= support_max; ++p) {
            const auto it = report.row_normalized.find({t, p});
            out << ',' << format_number(it == report.row_normalized.end() ? 0.0 : it->second);
        }
        out << '\n';
    }
    return out.str();
}

namespace {

std::vector<ContextKey> full_context_domain(FeatureSpace fs) {
    std::vector<ContextKey> keys;
    switch (fs) {
        case FeatureSpace::DeltaF:
            for (int d = -(kNumFingers - 1); d <= kNumFingers - 1; ++d) keys.push_back({d, 0, 0});
            break;
        case FeatureSpace::Pair:
            for (int fp = 1; fp <= kNumFingers; ++fp)
                for (int fc = 1; fc <= kNumFingers; ++fc) keys.push_back({fp, fc, 0});
            break;
        case FeatureSpace::PairTu:
            for (int fp = 1; fp <= kNumFingers; ++fp)
                for (int fc = 1; fc <= kNumFingers; ++fc)
                    for (int tu = 0; tu <= 1; ++tu) keys.push_back({fp, fc, tu});
            break;
    }
    return keys;
}

}  // namespace

std::string transition_csv(const IntervalModel& model) {
    std::ostringstream out;
    out << "context";
    for (int dn = model.support_min; dn <= model.support_max; ++dn) out << ',' << dn;
    out << '\n';
    for (const ContextKey& key : full_context_domain(model.feature_space)) {
        // Quote the label: pair contexts contain the CSV separator.
        out << '"' << context_key_label(model.feature_space, key) << '"';
        for (const double p : interval_distribution_key(model, key))
            out << ',' << format_number(p);
        out << '\n';
    }
    return out.str();
}

}  // namespace glovekit

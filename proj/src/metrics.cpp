#include "dmchain/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "dmchain/error.hpp"

namespace dmchain::eval {

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) noexcept {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size())
        throw DomainError("label and prediction counts differ");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool t = truth[i] == 1;
        const bool p = predicted[i] == 1;
        if (t && p)
            ++cm.tp;
        else if (t)
            ++cm.fn;
        else if (p)
            ++cm.fp;
        else
            ++cm.tn;
    }
    return cm;
}

bool MetricSet::is_undefined(std::string_view name) const noexcept {
    return std::find(undefined.begin(), undefined.end(), name) != undefined.end();
}

MetricSet classification_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0)
        throw DomainError("confusion matrix is empty");
    MetricSet s;
    auto ratio = [&](std::size_t num, std::size_t den, const char* name) {
        if (den == 0) {
            s.undefined.emplace_back(name);
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    s.accuracy = ratio(cm.tp + cm.tn, cm.total(), "accuracy");
    s.precision_pos = ratio(cm.tp, cm.tp + cm.fp, "precision_pos");
    s.precision_neg = ratio(cm.tn, cm.tn + cm.fn, "precision_neg");
    s.recall_pos = ratio(cm.tp, cm.tp + cm.fn, "recall_pos");
    s.recall_neg = ratio(cm.tn, cm.tn + cm.fp, "recall_neg");
    const double pr = s.precision_pos + s.recall_pos;
    if (pr == 0.0)
        s.undefined.emplace_back("f_measure");
    else
        s.f_measure = 2.0 * s.precision_pos * s.recall_pos / pr;
    return s;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw DomainError("score and label counts differ");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0)
        throw DomainError("AUC needs both classes");

    // Walk thresholds from high to low; each group of equal scores moves the
    // ROC point diagonally, which is what gives ties half credit.
    double area = 0.0;
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        double gtp = 0.0, gfp = 0.0;
        std::size_t j = i;
        for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j)
            (labels[order[j]] == 1 ? gtp : gfp) += 1.0;
        area += gfp * (tp + gtp / 2.0);
        tp += gtp;
        fp += gfp;
        i = j;
    }
    return area / (static_cast<double>(pos) * static_cast<double>(neg));
}

EvaluationReport evaluate_model(const models::AnyModel& model, const FeatureMatrix& test) {
    std::vector<double> scores(test.rows());
    std::vector<int> pred(test.rows());
    for (std::size_t i = 0; i < test.rows(); ++i) {
        scores[i] = models::model_score(model, test.row(i));
        pred[i] = models::model_predict(model, test.row(i));
    }
    EvaluationReport r;
    r.confusion = confusion_matrix(test.labels, pred);
    r.metrics = classification_metrics(r.confusion);
    const std::size_t pos = test.count_positive();
    if (pos > 0 && pos < test.rows())
        r.auc = roc_auc(scores, test.labels);
    return r;
}

} // namespace dmchain::eval

#include "dmchain/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dmchain/error.hpp"

namespace dmchain::eval {

std::vector<std::vector<std::size_t>> stratified_kfold_indices(const std::vector<int>& labels, std::size_t k,
                                                               std::uint64_t seed) {
    if (k < 2)
        throw CvError("k must be at least 2");
    std::vector<std::vector<std::size_t>> folds(k);
    std::mt19937_64 rng(seed);
    std::size_t offset = 0;
    for (int cls : {1, 0}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls)
                idx.push_back(i);
        if (idx.size() < k)
            throw CvError("class " + std::to_string(cls) + " has " + std::to_string(idx.size()) +
                          " rows, fewer than k=" + std::to_string(k));
        std::shuffle(idx.begin(), idx.end(), rng);
        // continue dealing where the previous class stopped so fold sizes stay
        // within one of each other overall
        for (std::size_t p = 0; p < idx.size(); ++p)
            folds[(offset + p) % k].push_back(idx[p]);
        offset = (offset + idx.size()) % k;
    }
    for (auto& f : folds)
        std::sort(f.begin(), f.end());
    return folds;
}

namespace {

struct FoldData {
    FeatureMatrix train;
    FeatureMatrix test;
};

std::vector<FoldData> materialize(const FeatureMatrix& m, const std::vector<std::vector<std::size_t>>& folds) {
    std::vector<FoldData> out;
    out.reserve(folds.size());
    std::vector<char> in_test(m.rows());
    for (const auto& f : folds) {
        std::fill(in_test.begin(), in_test.end(), 0);
        for (std::size_t i : f)
            in_test[i] = 1;
        std::vector<std::size_t> tr;
        tr.reserve(m.rows() - f.size());
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (!in_test[i])
                tr.push_back(i);
        out.push_back({m.take_rows(tr), m.take_rows(f)});
    }
    return out;
}

MeanStd mean_std(const std::vector<double>& v) {
    MeanStd r;
    if (v.empty())
        return r;
    for (double x : v)
        r.mean += x;
    r.mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(v.size()));
    return r;
}

FoldOutcome run_model(const FeatureMatrix& train, const FeatureMatrix& test, const models::AlgorithmConfig& cfg,
                      Exec exec) {
    const auto model = models::train_model(train, cfg, exec);
    FoldOutcome o;
    o.predicted.resize(test.rows());
    o.scores.resize(test.rows());
    for (std::size_t i = 0; i < test.rows(); ++i) {
        o.scores[i] = models::model_score(model, test.row(i));
        o.predicted[i] = models::model_predict(model, test.row(i));
    }
    return o;
}

CvSummary summarize(const std::vector<FoldData>& data, const std::vector<FoldOutcome>& outcomes) {
    CvSummary s;
    std::vector<double> acc, pp, pn, rp, rn, f, auc;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& test = data[i].test;
        const auto& o = outcomes[i];
        if (o.predicted.size() != test.rows() || o.scores.size() != test.rows())
            throw CvError("fold function returned the wrong number of predictions");
        const auto cm = confusion_matrix(test.labels, o.predicted);
        auto mset = classification_metrics(cm);
        const double a = roc_auc(o.scores, test.labels);
        acc.push_back(mset.accuracy);
        pp.push_back(mset.precision_pos);
        pn.push_back(mset.precision_neg);
        rp.push_back(mset.recall_pos);
        rn.push_back(mset.recall_neg);
        f.push_back(mset.f_measure);
        auc.push_back(a);
        s.fold_confusion.push_back(cm);
        s.fold_metrics.push_back(std::move(mset));
        s.fold_auc.push_back(a);
    }
    s.accuracy = mean_std(acc);
    s.precision_pos = mean_std(pp);
    s.precision_neg = mean_std(pn);
    s.recall_pos = mean_std(rp);
    s.recall_neg = mean_std(rn);
    s.f_measure = mean_std(f);
    s.auc = mean_std(auc);
    return s;
}

} // namespace

CvSummary stratified_kfold_cv(const FeatureMatrix& m, std::size_t k, std::uint64_t seed, const FoldFn& fn,
                              Exec exec) {
    const auto data = materialize(m, stratified_kfold_indices(m.labels, k, seed));
    std::vector<FoldOutcome> outcomes(data.size());
    const auto n = static_cast<std::ptrdiff_t>(data.size());
    if (exec == Exec::Parallel && !in_parallel_region()) {
        std::vector<std::exception_ptr> errors(data.size());
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            try {
                outcomes[u] = fn(data[u].train, data[u].test);
            } catch (...) {
                errors[u] = std::current_exception();
            }
        }
        for (const auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    } else {
        for (std::size_t i = 0; i < data.size(); ++i)
            outcomes[i] = fn(data[i].train, data[i].test);
    }
    return summarize(data, outcomes);
}

CvSummary stratified_kfold_cv(const FeatureMatrix& m, std::size_t k, const models::AlgorithmConfig& cfg,
                              std::uint64_t seed, Exec exec) {
    return stratified_kfold_cv(
        m, k, seed,
        [&](const FeatureMatrix& tr, const FeatureMatrix& te) { return run_model(tr, te, cfg, exec); },
        exec);
}

namespace {

void need(bool empty, const char* what) {
    if (empty)
        throw ConfigError(std::string("hyperparameter axis '") + what + "' is empty");
}

void validate_axes(const HyperGrid& g, models::Algorithm a) {
    switch (a) {
    case models::Algorithm::RandomForest:
        need(g.rf.n_estimators.empty(), "rf.n_estimators");
        need(g.rf.criterion.empty(), "rf.criterion");
        need(g.rf.max_features.empty(), "rf.max_features");
        need(g.rf.max_depth.empty(), "rf.max_depth");
        break;
    case models::Algorithm::Svm:
        need(g.svm.C.empty(), "svm.C");
        need(g.svm.degree.empty(), "svm.degree");
        need(g.svm.coef0.empty(), "svm.coef0");
        break;
    case models::Algorithm::LogisticRegression:
        need(g.lr.C.empty(), "lr.C");
        need(g.lr.solver.empty(), "lr.solver");
        break;
    }
}

} // namespace

void HyperGrid::validate() const {
    for (auto a : {models::Algorithm::RandomForest, models::Algorithm::Svm, models::Algorithm::LogisticRegression})
        validate_axes(*this, a);
}

std::vector<GridPoint> HyperGrid::points(models::Algorithm a, std::uint64_t model_seed) const {
    // Only the requested family's axes must be present. Invalid values are
    // left to the trainer so grid_search can record them as failed points.
    validate_axes(*this, a);
    std::vector<GridPoint> out;
    switch (a) {
    case models::Algorithm::RandomForest:
        for (auto n : rf.n_estimators)
            for (auto c : rf.criterion)
                for (auto mf : rf.max_features)
                    for (const auto& d : rf.max_depth) {
                        models::ForestConfig f{n, c, mf, d, model_seed};
                        out.push_back({f, models::describe(f)});
                    }
        break;
    case models::Algorithm::LogisticRegression:
        for (double c : lr.C)
            for (const auto& s : lr.solver) {
                models::LogisticConfig l;
                l.C = c;
                out.push_back({l, models::describe(l) + ",solver=" + s});
            }
        break;
    case models::Algorithm::Svm:
        for (double c : svm.C)
            for (int d : svm.degree)
                for (double c0 : svm.coef0) {
                    models::SvmConfig s;
                    s.C = c;
                    s.degree = d;
                    s.coef0 = c0;
                    out.push_back({s, models::describe(s)});
                }
        break;
    }
    return out;
}

HyperGrid HyperGrid::published() {
    using models::Criterion;
    using models::MaxFeatures;
    HyperGrid g;
    g.rf.n_estimators = {20, 40, 50, 60, 80, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
    g.rf.criterion = {Criterion::Gini, Criterion::Entropy};
    g.rf.max_features = {MaxFeatures::All, MaxFeatures::Sqrt, MaxFeatures::Log2};
    g.rf.max_depth = {std::nullopt, 2, 5, 8};
    g.svm.C = {0.001, 0.01, 0.1, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    g.lr.C = {1.0 / 64, 1.0 / 16, 1.0 / 4, 1, 4, 16, 64};
    return g;
}

HyperGrid HyperGrid::compact() {
    using models::Criterion;
    using models::MaxFeatures;
    HyperGrid g;
    g.rf.n_estimators = {50, 100};
    g.rf.criterion = {Criterion::Gini, Criterion::Entropy};
    g.rf.max_features = {MaxFeatures::Sqrt};
    g.rf.max_depth = {std::nullopt, 5, 8};
    g.svm.C = {0.1, 1, 10};
    g.lr.C = {1.0 / 64, 1.0 / 16, 1.0 / 4, 1, 4, 16, 64};
    return g;
}

GridResult grid_search(const FeatureMatrix& m, const HyperGrid& grid, models::Algorithm a, std::size_t k,
                       std::uint64_t seed, Exec exec) {
    auto pts = grid.points(a, seed);
    const auto data = materialize(m, stratified_kfold_indices(m.labels, k, seed));
    const std::size_t nf = data.size();
    const std::size_t tasks = pts.size() * nf;
    std::vector<double> acc(tasks, 0.0);
    std::vector<std::string> err(tasks);

    auto run = [&](std::size_t t, Exec inner) {
        const auto& fd = data[t % nf];
        try {
            const auto o = run_model(fd.train, fd.test, pts[t / nf].config, inner);
            acc[t] = classification_metrics(confusion_matrix(fd.test.labels, o.predicted)).accuracy;
        } catch (const std::exception& e) {
            err[t] = e.what();
            if (err[t].empty())
                err[t] = "training failed";
        }
    };
    const auto nt = static_cast<std::ptrdiff_t>(tasks);
    if (exec == Exec::Parallel && !in_parallel_region()) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t t = 0; t < nt; ++t)
            run(static_cast<std::size_t>(t), Exec::Serial);
    } else {
        for (std::ptrdiff_t t = 0; t < nt; ++t)
            run(static_cast<std::size_t>(t), Exec::Serial);
    }

    GridResult res;
    bool any = false;
    for (std::size_t p = 0; p < pts.size(); ++p) {
        GridEntry e{std::move(pts[p]), false, {}, 0.0, 0.0};
        std::vector<double> v;
        for (std::size_t f = 0; f < nf; ++f) {
            if (!err[p * nf + f].empty()) {
                e.failed = true;
                e.error = err[p * nf + f];
                break;
            }
            v.push_back(acc[p * nf + f]);
        }
        if (!e.failed) {
            const auto ms = mean_std(v);
            e.mean_accuracy = ms.mean;
            e.std_accuracy = ms.std;
            if (!any || ms.mean > res.table[res.best_index].mean_accuracy)
                res.best_index = p;
            any = true;
        }
        res.table.push_back(std::move(e));
    }
    if (!any)
        throw CvError("every grid point failed to train");
    return res;
}

} // namespace dmchain::eval

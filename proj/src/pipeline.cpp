#include "dmchain/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "dmchain/error.hpp"
#include "dmchain/smote.hpp"

namespace dmchain::pipeline {

using nlohmann::json;

std::string_view to_string(Stage s) noexcept {
    switch (s) {
    case Stage::Extract: return "extract";
    case Stage::Preprocess: return "preprocess";
    case Stage::FeatureSelection: return "feature_selection";
    case Stage::Split: return "split";
    case Stage::Balance: return "balance";
    case Stage::GridSearch: return "grid_search";
    case Stage::FinalFit: return "final_fit";
    case Stage::Evaluate: return "evaluate";
    }
    return "?";
}

namespace {

json report_json(const eval::EvaluationReport& r) {
    const auto& m = r.metrics;
    return {{"tp", r.confusion.tp},
            {"tn", r.confusion.tn},
            {"fp", r.confusion.fp},
            {"fn", r.confusion.fn},
            {"accuracy", m.accuracy},
            {"precision_pos", m.precision_pos},
            {"precision_neg", m.precision_neg},
            {"recall_pos", m.recall_pos},
            {"recall_neg", m.recall_neg},
            {"f_measure", m.f_measure},
            {"auc", r.auc},
            {"undefined", m.undefined},
            {"train_seconds", r.train_seconds},
            {"config", r.config}};
}

} // namespace

PipelineResult run_pipeline(const Dataset& raw, const PipelineOptions& opt, std::uint64_t seed,
                            const StageObserver& observer) {
    auto emit = [&](Stage s, const json& j) {
        if (observer)
            observer(s, j.dump());
    };
    PipelineResult res;
    res.rows_raw = raw.rows.size();
    emit(Stage::Extract, {{"rows", raw.rows.size()},
                          {"positives", raw.count_positive()},
                          {"negatives", raw.count_negative()},
                          {"schema", schema_hash(raw.schema)}});

    const auto t0 = std::chrono::steady_clock::now();
    const Dataset clean = preprocess::drop_missing_rows(raw);
    res.rows_clean = clean.rows.size();
    auto encoder = preprocess::CategoricalEncoder::fit(clean);
    FeatureMatrix full = encoder.apply(clean);
    emit(Stage::Preprocess, {{"rows", clean.rows.size()},
                             {"positives", clean.count_positive()},
                             {"negatives", clean.count_negative()},
                             {"columns", full.column_names}});

    std::vector<std::string> selected = full.column_names;
    if (opt.feature_selection) {
        featsel::RfecvOptions fo;
        fo.folds = opt.rfecv_folds;
        fo.exec = opt.exec;
        res.selection = featsel::rfecv_select(full, seed, fo);
        selected = res.selection->selected_features;
        emit(Stage::FeatureSelection, {{"enabled", true},
                                       {"selected", selected},
                                       {"cv_score_curve", res.selection->cv_score_curve},
                                       {"ranking", res.selection->ranking},
                                       {"best_count", res.selection->best_count}});
    } else {
        emit(Stage::FeatureSelection, {{"enabled", false}, {"selected", selected}});
    }
    const FeatureMatrix reduced = full.select_columns(selected);

    const auto split = preprocess::stratified_holdout_split(reduced, opt.train_fraction, seed);
    const auto norm = preprocess::fit_normalizer(split.train);
    FeatureMatrix train = preprocess::apply_normalizer(split.train, norm);
    const FeatureMatrix test = preprocess::apply_normalizer(split.test, norm);
    res.train_rows = train.rows();
    res.test_rows = test.rows();
    res.train_fingerprint = fingerprint(train);
    emit(Stage::Split, {{"train_rows", train.rows()},
                        {"test_rows", test.rows()},
                        {"train_positives", train.count_positive()},
                        {"test_positives", test.count_positive()},
                        {"normalizer_min", norm.min},
                        {"normalizer_max", norm.max}});

    if (opt.balancing) {
        smote::SmoteConfig sc{opt.smote_k, mix_seed(seed, 0x5307e)};
        train = smote::smote_oversample(train, sc, opt.exec);
    }
    res.train_rows_balanced = train.rows();
    res.train_fingerprint_balanced = fingerprint(train);
    emit(Stage::Balance, {{"enabled", opt.balancing},
                          {"rows", train.rows()},
                          {"positives", train.count_positive()},
                          {"fingerprint", res.train_fingerprint_balanced}});

    auto timed_grid = eval::timed_run(
        [&] { return eval::grid_search(train, opt.grid, opt.algorithm, opt.cv_folds, seed, opt.exec); });
    res.grid = std::move(timed_grid.value);
    json table = json::array();
    for (const auto& e : res.grid.table)
        table.push_back({{"config", e.point.label},
                         {"mean_accuracy", e.mean_accuracy},
                         {"std_accuracy", e.std_accuracy},
                         {"failed", e.failed},
                         {"error", e.error}});
    emit(Stage::GridSearch, {{"table", table}, {"best", res.grid.best_index}});

    const auto& best = res.grid.best();
    auto fit = eval::timed_run([&] { return models::train_model(train, best.point.config, opt.exec); });
    emit(Stage::FinalFit, {{"config", best.point.label},
                           {"converged", models::model_converged(fit.value)},
                           {"seconds", fit.seconds}});

    res.holdout = eval::evaluate_model(fit.value, test);
    res.holdout.train_seconds = timed_grid.seconds + fit.seconds;
    res.holdout.config = best.point.label;
    emit(Stage::Evaluate, report_json(res.holdout));

    res.prepared = PreparedModel{clean.schema, std::move(encoder), selected, norm, best.point.config,
                                 std::move(fit.value)};
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

RawRecord parse_record_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw EncodingError(std::string("record is not valid JSON: ") + e.what());
    }
    if (j.contains("features") && j["features"].is_object())
        j = j["features"];
    if (!j.is_object())
        throw EncodingError("record must be a JSON object of feature values");
    RawRecord r;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it->is_number())
            r[it.key()] = it->get<double>();
        else if (it->is_string())
            r[it.key()] = it->get<std::string>();
        else if (it->is_boolean())
            r[it.key()] = std::string(it->get<bool>() ? "true" : "false");
        else if (it->is_null())
            r[it.key()] = std::monostate{};
        else
            throw EncodingError("feature '" + it.key() + "' must be a number or a string");
    }
    return r;
}

std::string record_to_json(const RawRecord& r) {
    json j = json::object();
    for (const auto& [k, v] : r) {
        if (const auto* d = std::get_if<double>(&v))
            j[k] = *d;
        else if (const auto* s = std::get_if<std::string>(&v))
            j[k] = *s;
        else
            j[k] = nullptr;
    }
    return j.dump();
}

std::vector<double> transform_record(const PreparedModel& pm, const RawRecord& r) {
    const auto& schema = pm.schema;
    std::vector<Cell> cells(schema.features.size());
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
        const auto& spec = schema.features[f];
        bool needed = false;
        for (const auto& col : pm.selected_features)
            if (col == spec.name || (spec.kind == FeatureKind::Categorical && col.rfind(spec.name + "_", 0) == 0))
                needed = true;
        const auto it = r.find(spec.name);
        const bool present = it != r.end() && !std::holds_alternative<std::monostate>(it->second);
        if (!present) {
            if (needed)
                throw EncodingError("record lacks feature '" + spec.name + "'");
            // placeholder for a column the model does not read
            if (spec.kind == FeatureKind::Numeric)
                cells[f] = 0.0;
            else if (spec.kind == FeatureKind::Binary)
                cells[f] = std::string("0");
            else {
                const auto lv = pm.encoder.levels().find(spec.name);
                if (lv == pm.encoder.levels().end() || lv->second.empty())
                    throw EncodingError("no levels recorded for '" + spec.name + "'");
                cells[f] = lv->second.front();
            }
            continue;
        }
        Cell c = it->second;
        if (spec.kind == FeatureKind::Numeric) {
            if (const auto* s = std::get_if<std::string>(&c)) {
                try {
                    std::size_t used = 0;
                    const double v = std::stod(*s, &used);
                    if (used != s->size())
                        throw std::invalid_argument("trailing text");
                    c = v;
                } catch (const std::exception&) {
                    throw EncodingError("feature '" + spec.name + "' is not numeric: '" + *s + "'");
                }
            }
            const double v = std::get<double>(c);
            if (!std::isfinite(v))
                throw EncodingError("feature '" + spec.name + "' is not finite");
            if (needed && spec.zero_is_missing && v == 0.0)
                throw PreprocessError("feature '" + spec.name + "' is zero, which marks a missing value");
        } else if (const auto* d = std::get_if<double>(&c)) {
            c = format_double(*d);
        }
        cells[f] = std::move(c);
    }
    const auto encoded = pm.encoder.apply_record(cells);
    const auto& cols = pm.encoder.output_columns();
    std::vector<double> x;
    x.reserve(pm.selected_features.size());
    for (const auto& name : pm.selected_features) {
        const auto pos = std::find(cols.begin(), cols.end(), name);
        if (pos == cols.end())
            throw EncodingError("selected feature '" + name + "' is not produced by the encoder");
        x.push_back(encoded[static_cast<std::size_t>(pos - cols.begin())]);
    }
    preprocess::apply_normalizer_inplace(x, pm.normalizer);
    return x;
}

Prediction predict_record(const PreparedModel& pm, const RawRecord& r) {
    const auto x = transform_record(pm, r);
    return {models::model_predict(pm.model, x), models::model_score(pm.model, x)};
}

} // namespace dmchain::pipeline

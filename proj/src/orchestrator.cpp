#include "dmchain/orchestrator.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "dmchain/error.hpp"

namespace dmchain::orchestrator {

using nlohmann::json;
using ledger::TxRequest;
using ledger::TxType;

void ExperimentSpec::validate() const {
    if (dataset.empty())
        throw ConfigError("experiment needs a dataset name");
    if (seeds.empty())
        throw ConfigError("experiment needs at least one seed");
    grid.validate();
}

ServiceKeys register_service(ledger::Network& net) {
    using ledger::Action;
    using ledger::AssetClass;
    using ledger::Rule;
    using ledger::Scope;
    ServiceKeys k;
    k.pipeline = net.register_participant(kPipelineId, ledger::Role::Hospital, "service:pipeline", "pipeline").keys;
    k.ai_service = net.register_participant(kAiServiceId, ledger::Role::Hospital, "service:ai", "ai").keys;
    net.add_rule(Rule{std::string(kPipelineId), AssetClass::Model, Action::Write, Scope::Any, {}, true});
    net.add_rule(Rule{std::string(kAiServiceId), AssetClass::Prediction, Action::Write, Scope::Any, {}, true});
    return k;
}

Service::Service(ledger::Network& net, ServiceKeys keys, pipeline::PipelineOptions defaults)
    : net_(net), keys_(std::move(keys)), defaults_(std::move(defaults)) {}

std::shared_ptr<const DeployedModel> Service::deployed() const {
    std::lock_guard lock(deploy_mu_);
    return current_;
}

void Service::restore(std::shared_ptr<const DeployedModel> m) {
    std::lock_guard lock(deploy_mu_);
    current_ = std::move(m);
}

DpmtOutcome Service::run_dpmt(const Dataset& data, const std::string& dataset_name,
                              const pipeline::PipelineOptions& opt, std::uint64_t seed) {
    std::lock_guard serial(dpmt_mu_);
    std::size_t previous = 0;
    for (const auto& t : net_.transactions())
        if (t.actor == kPipelineId && t.type == TxType::PipelineStage && t.note == "extract")
            ++previous;
    const std::string version = dataset_name + "-" + std::string(models::to_string(opt.algorithm)) + "-v" +
                                std::to_string(previous + 1);

    auto log = [&](TxType type, const std::string& note, const std::optional<std::string>& payload) {
        TxRequest req;
        req.type = type;
        req.asset = ledger::AssetClass::Model;
        req.actor = kPipelineId;
        req.subject = version;
        req.reference = version;
        req.note = note;
        if (payload)
            req.payload_hash = net_.store_offchain(*payload);
        const auto r = net_.submit(req, keys_.pipeline);
        if (!r.accepted())
            throw WorkflowError("ledger rejected " + std::string(ledger::to_string(type)) + ": " + r.reason);
        return r;
    };

    try {
        auto result = pipeline::run_pipeline(data, opt, seed, [&](pipeline::Stage s, const std::string& artifact) {
            const json wrapped = {{"stage", std::string(pipeline::to_string(s))},
                                  {"version", version},
                                  {"seed", seed},
                                  {"artifact", json::parse(artifact)}};
            log(TxType::PipelineStage, std::string(pipeline::to_string(s)), wrapped.dump());
        });
        auto dm = std::make_shared<DeployedModel>();
        dm->prepared = result.prepared;
        dm->version = version;
        dm->dataset = dataset_name;
        const std::string artifact = pipeline::serialize_prepared(dm->prepared);
        dm->artifact_hash = sha256(artifact);
        dm->deployment_tx = log(TxType::ModelDeployment, dataset_name, artifact).tx_id;
        std::shared_ptr<const DeployedModel> frozen = std::move(dm);
        {
            std::lock_guard lock(deploy_mu_);
            current_ = frozen;
        }
        return {frozen, std::move(result)};
    } catch (const std::exception& e) {
        TxRequest req;
        req.type = TxType::PipelineFailure;
        req.actor = kPipelineId;
        req.subject = version;
        req.reference = version;
        req.note = e.what();
        net_.submit(req, keys_.pipeline);
        throw;
    }
}

DpResult Service::run_dp(const std::string& record_json, const std::string& user_id, const ledger::KeyPair& user_key) {
    const auto model = deployed();
    if (!model)
        throw WorkflowError("no model has been deployed");
    const auto record = pipeline::parse_record_json(record_json);

    DpResult out;
    out.model_version = model->version;
    out.input_hash = net_.store_offchain(record_json);
    TxRequest req;
    req.type = TxType::RiskFactorsForPrediction;
    req.actor = user_id;
    req.subject = user_id;
    req.payload_hash = out.input_hash;
    req.reference = model->version;
    const auto r1 = net_.submit(req, user_key);
    if (!r1.accepted())
        throw PolicyError("prediction request denied: " + r1.reason);
    out.request_tx = r1.tx_id;

    const auto p = pipeline::predict_record(model->prepared, record);
    out.predicted_class = p.predicted_class;
    out.score = p.score;

    const json payload = {{"input_hash", to_hex(out.input_hash)},
                          {"model_version", model->version},
                          {"class", p.predicted_class},
                          {"score", p.score},
                          {"request_tx", to_hex(out.request_tx)}};
    out.result_payload = net_.store_offchain(payload.dump());
    TxRequest res;
    res.type = TxType::PredictionResult;
    res.actor = kAiServiceId;
    res.subject = user_id;
    res.payload_hash = out.result_payload;
    res.reference = to_hex(out.request_tx);
    res.note = "class=" + std::to_string(p.predicted_class);
    const auto r2 = net_.submit(res, keys_.ai_service);
    if (!r2.accepted())
        throw PolicyError("prediction result denied: " + r2.reason);
    out.result_tx = r2.tx_id;
    return out;
}

std::optional<std::string> check_prediction(const ledger::Network& net, const DeployedModel& model,
                                            const ledger::Transaction& tx) {
    if (tx.type != TxType::PredictionResult)
        return "not a PredictionResult transaction";
    if (!tx.payload_hash || !net.store().contains(*tx.payload_hash))
        return "result payload does not resolve";
    json j;
    try {
        j = json::parse(net.fetch_offchain(*tx.payload_hash));
    } catch (const json::exception&) {
        return "result payload is not JSON";
    }
    const auto input = parse_hash(j.value("input_hash", ""));
    if (!input || !net.store().contains(*input))
        return "input payload does not resolve";
    if (j.value("model_version", "") != model.version)
        return "recorded model version differs from the supplied model";
    try {
        const auto p = pipeline::predict_record(model.prepared, pipeline::parse_record_json(net.fetch_offchain(*input)));
        if (p.predicted_class != j.value("class", -1))
            return "re-inference gives class " + std::to_string(p.predicted_class);
    } catch (const std::exception& e) {
        return std::string("re-inference failed: ") + e.what();
    }
    return std::nullopt;
}

std::shared_ptr<const DeployedModel> load_deployment(const ledger::Network& net, const ledger::Transaction& tx) {
    if (tx.type != TxType::ModelDeployment || !tx.payload_hash)
        throw StateError("not a model deployment transaction");
    auto dm = std::make_shared<DeployedModel>();
    dm->prepared = pipeline::deserialize_prepared(net.fetch_offchain(*tx.payload_hash));
    dm->version = tx.reference;
    dm->dataset = tx.note;
    dm->artifact_hash = *tx.payload_hash;
    dm->deployment_tx = tx.tx_id;
    return dm;
}

namespace {

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

std::string run_key(const RunRecord& r) {
    return r.dataset + "/" + std::string(models::to_string(r.algorithm)) + "/fs=" + (r.feature_selection ? "1" : "0") +
           "/bal=" + (r.balancing ? "1" : "0") + "/seed=" + std::to_string(r.seed);
}

json ms_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

} // namespace

Aggregate aggregate(const std::vector<RunRecord>& runs) {
    Aggregate a;
    if (runs.empty())
        return a;
    a.dataset = runs.front().dataset;
    a.algorithm = runs.front().algorithm;
    a.feature_selection = runs.front().feature_selection;
    a.balancing = runs.front().balancing;
    a.runs = runs.size();
    std::vector<double> acc, pp, pn, rp, rn, f, auc, t, cv;
    for (const auto& r : runs) {
        const auto& m = r.holdout.metrics;
        acc.push_back(m.accuracy);
        pp.push_back(m.precision_pos);
        pn.push_back(m.precision_neg);
        rp.push_back(m.recall_pos);
        rn.push_back(m.recall_neg);
        f.push_back(m.f_measure);
        auc.push_back(r.holdout.auc);
        t.push_back(r.holdout.train_seconds);
        cv.push_back(r.cv_mean_accuracy);
        a.mean_tp += static_cast<double>(r.holdout.confusion.tp);
        a.mean_tn += static_cast<double>(r.holdout.confusion.tn);
        a.mean_fp += static_cast<double>(r.holdout.confusion.fp);
        a.mean_fn += static_cast<double>(r.holdout.confusion.fn);
    }
    const double n = static_cast<double>(runs.size());
    a.mean_tp /= n;
    a.mean_tn /= n;
    a.mean_fp /= n;
    a.mean_fn /= n;
    a.accuracy = mean_std(acc);
    a.precision_pos = mean_std(pp);
    a.precision_neg = mean_std(pn);
    a.recall_pos = mean_std(rp);
    a.recall_neg = mean_std(rn);
    a.f_measure = mean_std(f);
    a.auc = mean_std(auc);
    a.train_seconds = mean_std(t);
    a.cv_accuracy = mean_std(cv);
    return a;
}

ReportBundle reproduce_experiment(const std::vector<ExperimentSpec>& specs, const DatasetProvider& provider,
                                  const pipeline::PipelineOptions& base) {
    ReportBundle b;
    std::map<std::string, std::optional<Dataset>> cache;
    for (const auto& spec : specs) {
        spec.validate();
        auto it = cache.find(spec.dataset);
        if (it == cache.end())
            it = cache.emplace(spec.dataset, provider ? provider(spec.dataset) : std::nullopt).first;
        if (!it->second) {
            b.notices.push_back("skipped " + spec.dataset + "/" + std::string(models::to_string(spec.algorithm)) +
                                ": dataset not available");
            continue;
        }
        pipeline::PipelineOptions opt = base;
        opt.algorithm = spec.algorithm;
        opt.feature_selection = spec.feature_selection;
        opt.balancing = spec.balancing;
        opt.grid = spec.grid;
        std::vector<RunRecord> runs;
        for (auto seed : spec.seeds) {
            const auto res = pipeline::run_pipeline(*it->second, opt, seed);
            RunRecord r;
            r.dataset = spec.dataset;
            r.algorithm = spec.algorithm;
            r.feature_selection = spec.feature_selection;
            r.balancing = spec.balancing;
            r.seed = seed;
            r.holdout = res.holdout;
            r.cv_mean_accuracy = res.grid.best().mean_accuracy;
            r.cv_std_accuracy = res.grid.best().std_accuracy;
            r.best_config = res.grid.best().point.label;
            r.selected_features = res.prepared.selected_features;
            r.seconds = res.seconds;
            runs.push_back(std::move(r));
        }
        b.aggregates.push_back(aggregate(runs));
        b.runs.insert(b.runs.end(), runs.begin(), runs.end());
    }
    return b;
}

DatasetProvider manifest_provider(const config::AppConfig& cfg) {
    return [cfg](const std::string& name) -> std::optional<Dataset> {
        if (!config::dataset_available(cfg, name))
            return std::nullopt;
        return config::load_dataset(cfg, name);
    };
}

std::string bundle_to_json(const ReportBundle& b) {
    json runs = json::array();
    for (const auto& r : b.runs) {
        const auto& m = r.holdout.metrics;
        const auto& c = r.holdout.confusion;
        runs.push_back({{"key", run_key(r)},
                        {"dataset", r.dataset},
                        {"algorithm", std::string(models::to_string(r.algorithm))},
                        {"feature_selection", r.feature_selection},
                        {"balancing", r.balancing},
                        {"seed", r.seed},
                        {"holdout",
                         {{"accuracy", m.accuracy},
                          {"precision_pos", m.precision_pos},
                          {"precision_neg", m.precision_neg},
                          {"recall_pos", m.recall_pos},
                          {"recall_neg", m.recall_neg},
                          {"f_measure", m.f_measure},
                          {"auc", r.holdout.auc},
                          {"undefined", m.undefined},
                          {"confusion", {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}}},
                          {"train_seconds", r.holdout.train_seconds}}},
                        {"cv", {{"accuracy_mean", r.cv_mean_accuracy}, {"accuracy_std", r.cv_std_accuracy}}},
                        {"best_config", r.best_config},
                        {"selected_features", r.selected_features},
                        {"seconds", r.seconds}});
    }
    json aggs = json::array();
    for (const auto& a : b.aggregates)
        aggs.push_back({{"dataset", a.dataset},
                        {"algorithm", std::string(models::to_string(a.algorithm))},
                        {"feature_selection", a.feature_selection},
                        {"balancing", a.balancing},
                        {"runs", a.runs},
                        {"accuracy", ms_json(a.accuracy)},
                        {"precision_pos", ms_json(a.precision_pos)},
                        {"precision_neg", ms_json(a.precision_neg)},
                        {"recall_pos", ms_json(a.recall_pos)},
                        {"recall_neg", ms_json(a.recall_neg)},
                        {"f_measure", ms_json(a.f_measure)},
                        {"auc", ms_json(a.auc)},
                        {"train_seconds", ms_json(a.train_seconds)},
                        {"cv_accuracy", ms_json(a.cv_accuracy)},
                        {"mean_confusion", {{"tp", a.mean_tp}, {"tn", a.mean_tn}, {"fp", a.mean_fp}, {"fn", a.mean_fn}}}});
    return json{{"runs", runs}, {"aggregates", aggs}, {"notices", b.notices}}.dump(2);
}

void write_tables(std::ostream& out, const ReportBundle& b) {
    const auto flags = out.flags();
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(8) << "dataset" << std::setw(5) << "alg" << std::setw(4) << "fs" << std::setw(5)
        << "bal" << std::setw(6) << "runs" << std::setw(18) << "accuracy" << std::setw(10) << "f" << std::setw(10)
        << "prec+" << std::setw(10) << "rec+" << std::setw(10) << "auc" << std::setw(9) << "fn" << "seconds\n";
    for (const auto& a : b.aggregates) {
        std::ostringstream acc;
        acc << std::fixed << std::setprecision(4) << a.accuracy.mean << "+-" << a.accuracy.std;
        out << std::setw(8) << a.dataset << std::setw(5) << models::to_string(a.algorithm) << std::setw(4)
            << (a.feature_selection ? "on" : "off") << std::setw(5) << (a.balancing ? "on" : "off") << std::setw(6)
            << a.runs << std::setw(18) << acc.str() << std::setw(10) << a.f_measure.mean << std::setw(10)
            << a.precision_pos.mean << std::setw(10) << a.recall_pos.mean << std::setw(10) << a.auc.mean
            << std::setw(9) << std::setprecision(1) << a.mean_fn << std::setprecision(3) << a.train_seconds.mean
            << std::setprecision(4) << '\n';
    }
    if (!b.runs.empty()) {
        out << "\nkey\taccuracy\tf_measure\tauc\ttp\ttn\tfp\tfn\tbest_config\n";
        for (const auto& r : b.runs) {
            const auto& c = r.holdout.confusion;
            out << run_key(r) << '\t' << r.holdout.metrics.accuracy << '\t' << r.holdout.metrics.f_measure << '\t'
                << r.holdout.auc << '\t' << c.tp << '\t' << c.tn << '\t' << c.fp << '\t' << c.fn << '\t'
                << r.best_config << '\n';
        }
    }
    for (const auto& n : b.notices)
        out << "note: " << n << '\n';
    out.flags(flags);
}

} // namespace dmchain::orchestrator

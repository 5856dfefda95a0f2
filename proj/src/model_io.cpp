#include <json.hpp>

#include "dmchain/digest.hpp"
#include "dmchain/error.hpp"
#include "dmchain/pipeline.hpp"

namespace dmchain::pipeline {

using nlohmann::json;
using namespace models;

namespace {

constexpr int kFormatVersion = 1;

std::string_view kind_name(FeatureKind k) {
    switch (k) {
    case FeatureKind::Numeric: return "numeric";
    case FeatureKind::Binary: return "binary";
    case FeatureKind::Categorical: return "categorical";
    }
    return "?";
}

FeatureKind parse_kind(const std::string& s) {
    if (s == "numeric")
        return FeatureKind::Numeric;
    if (s == "binary")
        return FeatureKind::Binary;
    if (s == "categorical")
        return FeatureKind::Categorical;
    throw LoadError("unknown feature kind '" + s + "'");
}

json config_json(const AlgorithmConfig& c) {
    if (const auto* f = std::get_if<ForestConfig>(&c))
        return {{"n_estimators", f->n_estimators},
                {"criterion", std::string(to_string(f->criterion))},
                {"max_features", std::string(to_string(f->max_features))},
                {"max_depth", f->max_depth ? json(*f->max_depth) : json(nullptr)},
                {"seed", f->seed}};
    if (const auto* l = std::get_if<LogisticConfig>(&c))
        return {{"C", l->C}, {"tol", l->tol}, {"max_iter", l->max_iter}};
    const auto& s = std::get<SvmConfig>(c);
    return {{"C", s.C}, {"degree", s.degree}, {"coef0", s.coef0}, {"tol", s.tol}, {"max_iter", s.max_iter},
            {"cache_mb", s.cache_mb}};
}

AlgorithmConfig config_from(Algorithm a, const json& j) {
    switch (a) {
    case Algorithm::RandomForest: {
        ForestConfig f;
        f.n_estimators = j.at("n_estimators").get<std::size_t>();
        f.criterion = parse_criterion(j.at("criterion").get<std::string>());
        f.max_features = parse_max_features(j.at("max_features").get<std::string>());
        if (!j.at("max_depth").is_null())
            f.max_depth = j.at("max_depth").get<std::size_t>();
        f.seed = j.at("seed").get<std::uint64_t>();
        return f;
    }
    case Algorithm::LogisticRegression: {
        LogisticConfig l;
        l.C = j.at("C").get<double>();
        l.tol = j.at("tol").get<double>();
        l.max_iter = j.at("max_iter").get<std::size_t>();
        return l;
    }
    case Algorithm::Svm: {
        SvmConfig s;
        s.C = j.at("C").get<double>();
        s.degree = j.at("degree").get<int>();
        s.coef0 = j.at("coef0").get<double>();
        s.tol = j.at("tol").get<double>();
        s.max_iter = j.at("max_iter").get<std::size_t>();
        s.cache_mb = j.at("cache_mb").get<std::size_t>();
        return s;
    }
    }
    throw LoadError("unknown algorithm");
}

json model_json(const AnyModel& m) {
    if (const auto* f = std::get_if<RandomForest>(&m)) {
        json trees = json::array();
        for (const auto& t : f->trees()) {
            json nodes = json::array();
            for (const auto& n : t.nodes())
                nodes.push_back({n.feature, n.threshold, n.left, n.right, n.negatives, n.positives, n.impurity,
                                 n.depth});
            trees.push_back(std::move(nodes));
        }
        return {{"n_features", f->n_features()}, {"trees", std::move(trees)}};
    }
    if (const auto* l = std::get_if<LogisticModel>(&m))
        return {{"intercept", l->intercept},   {"coefficients", l->coefficients}, {"C", l->C},
                {"converged", l->converged},   {"iterations", l->iterations},     {"gradient_norm", l->gradient_norm}};
    const auto& s = std::get<SvmModel>(m);
    return {{"n_features", s.n_features}, {"support_vectors", s.support_vectors},
            {"dual_coef", s.dual_coef},   {"bias", s.bias},
            {"degree", s.degree},         {"coef0", s.coef0},
            {"C", s.C},                   {"converged", s.converged},
            {"iterations", s.iterations}, {"dual_objective", s.dual_objective}};
}

AnyModel model_from(Algorithm a, const AlgorithmConfig& cfg, const json& j) {
    switch (a) {
    case Algorithm::RandomForest: {
        const auto nf = j.at("n_features").get<std::size_t>();
        std::vector<DecisionTree> trees;
        for (const auto& tj : j.at("trees")) {
            std::vector<TreeNode> nodes;
            for (const auto& nj : tj) {
                TreeNode n;
                n.feature = nj.at(0).get<int>();
                n.threshold = nj.at(1).get<double>();
                n.left = nj.at(2).get<int>();
                n.right = nj.at(3).get<int>();
                n.negatives = nj.at(4).get<double>();
                n.positives = nj.at(5).get<double>();
                n.impurity = nj.at(6).get<double>();
                n.depth = nj.at(7).get<std::size_t>();
                nodes.push_back(n);
            }
            trees.push_back(DecisionTree::from_nodes(std::move(nodes), nf));
        }
        return RandomForest::from_trees(std::get<ForestConfig>(cfg), std::move(trees), nf);
    }
    case Algorithm::LogisticRegression: {
        LogisticModel l;
        l.intercept = j.at("intercept").get<double>();
        l.coefficients = j.at("coefficients").get<std::vector<double>>();
        l.C = j.at("C").get<double>();
        l.converged = j.at("converged").get<bool>();
        l.iterations = j.at("iterations").get<std::size_t>();
        l.gradient_norm = j.at("gradient_norm").get<double>();
        return l;
    }
    case Algorithm::Svm: {
        SvmModel s;
        s.n_features = j.at("n_features").get<std::size_t>();
        s.support_vectors = j.at("support_vectors").get<std::vector<double>>();
        s.dual_coef = j.at("dual_coef").get<std::vector<double>>();
        s.bias = j.at("bias").get<double>();
        s.degree = j.at("degree").get<int>();
        s.coef0 = j.at("coef0").get<double>();
        s.C = j.at("C").get<double>();
        s.converged = j.at("converged").get<bool>();
        s.iterations = j.at("iterations").get<std::size_t>();
        s.dual_objective = j.at("dual_objective").get<double>();
        if (s.support_vectors.size() != s.dual_coef.size() * s.n_features)
            throw LoadError("SVM support vector block has the wrong size");
        return s;
    }
    }
    throw LoadError("unknown algorithm");
}

json schema_json(const DatasetSchema& s) {
    json feats = json::array();
    for (const auto& f : s.features)
        feats.push_back({{"name", f.name}, {"kind", std::string(kind_name(f.kind))}, {"zero_is_missing", f.zero_is_missing}});
    return {{"features", feats}, {"label", s.label_name}, {"positive", s.positive_label}, {"negative", s.negative_label}};
}

DatasetSchema schema_from(const json& j) {
    DatasetSchema s;
    for (const auto& f : j.at("features"))
        s.features.push_back(
            {f.at("name").get<std::string>(), parse_kind(f.at("kind").get<std::string>()), f.at("zero_is_missing").get<bool>()});
    s.label_name = j.at("label").get<std::string>();
    s.positive_label = j.at("positive").get<std::string>();
    s.negative_label = j.at("negative").get<std::string>();
    s.validate();
    return s;
}

} // namespace

std::string schema_hash(const DatasetSchema& s) {
    std::string text;
    for (const auto& f : s.features)
        text += f.name + '\x1f' + std::string(kind_name(f.kind)) + '\x1f' + (f.zero_is_missing ? "1" : "0") + '\n';
    text += s.label_name + '\x1f' + s.positive_label + '\x1f' + s.negative_label + '\n';
    return to_hex(sha256(text));
}

std::string serialize_prepared(const PreparedModel& pm) {
    json j;
    j["format"] = "dmchain-model";
    j["version"] = kFormatVersion;
    j["schema_hash"] = schema_hash(pm.schema);
    j["schema"] = schema_json(pm.schema);
    j["levels"] = pm.encoder.levels();
    j["selected_features"] = pm.selected_features;
    j["normalizer"] = {{"columns", pm.normalizer.columns}, {"min", pm.normalizer.min}, {"max", pm.normalizer.max}};
    const Algorithm a = algorithm_of(pm.config);
    j["algorithm"] = std::string(to_string(a));
    j["config"] = config_json(pm.config);
    j["model"] = model_json(pm.model);
    return j.dump();
}

PreparedModel deserialize_prepared(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "dmchain-model")
            throw LoadError("not a model file");
        if (j.at("version").get<int>() != kFormatVersion)
            throw LoadError("unsupported model format version " + std::to_string(j.at("version").get<int>()));
        PreparedModel pm;
        pm.schema = schema_from(j.at("schema"));
        if (schema_hash(pm.schema) != j.at("schema_hash").get<std::string>())
            throw LoadError("model schema hash mismatch");
        pm.encoder = preprocess::CategoricalEncoder::from_parts(
            pm.schema, j.at("levels").get<std::map<std::string, std::vector<std::string>>>());
        pm.selected_features = j.at("selected_features").get<std::vector<std::string>>();
        const auto& nj = j.at("normalizer");
        pm.normalizer.columns = nj.at("columns").get<std::vector<std::string>>();
        pm.normalizer.min = nj.at("min").get<std::vector<double>>();
        pm.normalizer.max = nj.at("max").get<std::vector<double>>();
        const Algorithm a = parse_algorithm(j.at("algorithm").get<std::string>());
        pm.config = config_from(a, j.at("config"));
        pm.model = model_from(a, pm.config, j.at("model"));
        if (model_feature_count(pm.model) != pm.selected_features.size() ||
            pm.normalizer.columns != pm.selected_features)
            throw LoadError("model arity does not match the selected feature list");
        return pm;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("malformed model file: ") + e.what());
    } catch (const ConfigError& e) {
        throw LoadError(std::string("malformed model file: ") + e.what());
    }
}

} // namespace dmchain::pipeline

#include "dmchain/config.hpp"

#include <fstream>
#include <iterator>
#include <json.hpp>
#include <set>

#include "dmchain/error.hpp"
#include "dmchain/mimic.hpp"

namespace dmchain::config {

using nlohmann::json;

namespace {

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object())
        throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
std::vector<T> list(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw ConfigError(where + " must be a non-empty list");
    return j.get<std::vector<T>>();
}

void apply_grid(const json& g, eval::HyperGrid& grid) {
    only_keys(g, {"preset", "rf", "svm", "lr"}, "grid");
    if (g.contains("preset")) {
        const auto p = g["preset"].get<std::string>();
        if (p == "compact")
            grid = eval::HyperGrid::compact();
        else if (p == "published")
            grid = eval::HyperGrid::published();
        else
            throw ConfigError("unknown grid preset '" + p + "'");
    }
    if (g.contains("rf")) {
        const auto& r = g["rf"];
        only_keys(r, {"n_estimators", "criterion", "max_features", "max_depth"}, "grid.rf");
        if (r.contains("n_estimators"))
            grid.rf.n_estimators = list<std::size_t>(r["n_estimators"], "grid.rf.n_estimators");
        if (r.contains("criterion")) {
            grid.rf.criterion.clear();
            for (const auto& s : list<std::string>(r["criterion"], "grid.rf.criterion"))
                grid.rf.criterion.push_back(models::parse_criterion(s));
        }
        if (r.contains("max_features")) {
            grid.rf.max_features.clear();
            for (const auto& s : list<std::string>(r["max_features"], "grid.rf.max_features"))
                grid.rf.max_features.push_back(models::parse_max_features(s));
        }
        if (r.contains("max_depth")) {
            if (!r["max_depth"].is_array() || r["max_depth"].empty())
                throw ConfigError("grid.rf.max_depth must be a non-empty list");
            grid.rf.max_depth.clear();
            for (const auto& d : r["max_depth"])
                grid.rf.max_depth.push_back(d.is_null() ? std::nullopt : std::optional<std::size_t>(d.get<std::size_t>()));
        }
    }
    if (g.contains("svm")) {
        const auto& s = g["svm"];
        only_keys(s, {"C", "degree", "coef0"}, "grid.svm");
        if (s.contains("C"))
            grid.svm.C = list<double>(s["C"], "grid.svm.C");
        if (s.contains("degree"))
            grid.svm.degree = list<int>(s["degree"], "grid.svm.degree");
        if (s.contains("coef0"))
            grid.svm.coef0 = list<double>(s["coef0"], "grid.svm.coef0");
    }
    if (g.contains("lr")) {
        const auto& l = g["lr"];
        only_keys(l, {"C", "solver"}, "grid.lr");
        if (l.contains("C"))
            grid.lr.C = list<double>(l["C"], "grid.lr.C");
        if (l.contains("solver"))
            grid.lr.solver = list<std::string>(l["solver"], "grid.lr.solver");
    }
}

} // namespace

void AppConfig::validate() const {
    grid.validate();
    if (seeds.empty())
        throw ConfigError("seeds must not be empty");
    if (smote_k == 0)
        throw ConfigError("smote_k must be at least 1");
    if (sealing_batch == 0)
        throw ConfigError("sealing_batch must be at least 1");
    if (cv_folds < 2 || rfecv_folds < 2)
        throw ConfigError("fold counts must be at least 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction must lie in (0, 1)");
    for (const auto& [name, src] : datasets) {
        schemas::by_name(src.schema);
        if (src.kind == DatasetSource::Kind::MimicSynthetic &&
            (src.cohort_rows < 10 || !(src.positive_ratio > 0.0 && src.positive_ratio < 1.0)))
            throw ConfigError("dataset '" + name + "' has an invalid synthetic cohort size or ratio");
    }
}

AppConfig default_config(const std::filesystem::path& data_dir) {
    AppConfig c;
    c.datasets["pima"] = {DatasetSource::Kind::Csv, "pima", data_dir / "pima.csv"};
    c.datasets["sylhet"] = {DatasetSource::Kind::Csv, "sylhet", data_dir / "sylhet.csv"};
    c.datasets["mimic"] = {DatasetSource::Kind::MimicSynthetic, "mimic", {}};
    return c;
}

AppConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        only_keys(j,
                  {"datasets", "grid", "seeds", "smote_k", "svm_degree", "sealing_batch", "cv_folds", "rfecv_folds",
                   "train_fraction"},
                  "config");
        AppConfig c;
        if (j.contains("datasets")) {
            only_keys(j["datasets"], {"pima", "sylhet", "mimic"}, "datasets");
            for (auto it = j["datasets"].begin(); it != j["datasets"].end(); ++it) {
                const auto& d = it.value();
                only_keys(d, {"kind", "schema", "path", "rows", "positive_ratio", "seed"}, "datasets." + it.key());
                DatasetSource s;
                s.schema = d.value("schema", it.key());
                const auto kind = d.value("kind", std::string("csv"));
                if (kind == "csv")
                    s.kind = DatasetSource::Kind::Csv;
                else if (kind == "mimic-synthetic")
                    s.kind = DatasetSource::Kind::MimicSynthetic;
                else if (kind == "mimic-tables")
                    s.kind = DatasetSource::Kind::MimicTables;
                else
                    throw ConfigError("unknown dataset kind '" + kind + "'");
                if (d.contains("path")) {
                    s.path = d["path"].get<std::string>();
                    if (s.path.is_relative())
                        s.path = base_dir / s.path;
                } else if (s.kind != DatasetSource::Kind::MimicSynthetic) {
                    throw ConfigError("dataset '" + it.key() + "' needs a path");
                }
                s.cohort_rows = d.value("rows", s.cohort_rows);
                s.positive_ratio = d.value("positive_ratio", s.positive_ratio);
                s.cohort_seed = d.value("seed", s.cohort_seed);
                c.datasets[it.key()] = s;
            }
        }
        if (j.contains("grid"))
            apply_grid(j["grid"], c.grid);
        if (j.contains("seeds"))
            c.seeds = list<std::uint64_t>(j["seeds"], "seeds");
        c.smote_k = j.value("smote_k", c.smote_k);
        if (j.contains("svm_degree"))
            c.grid.svm.degree = {j["svm_degree"].get<int>()};
        c.sealing_batch = j.value("sealing_batch", c.sealing_batch);
        c.cv_folds = j.value("cv_folds", c.cv_folds);
        c.rfecv_folds = j.value("rfecv_folds", c.rfecv_folds);
        c.train_fraction = j.value("train_fraction", c.train_fraction);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

AppConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw LoadError("cannot open config " + file.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, file.parent_path());
}

bool dataset_available(const AppConfig& cfg, const std::string& name) {
    const auto it = cfg.datasets.find(name);
    if (it == cfg.datasets.end())
        return false;
    return it->second.kind == DatasetSource::Kind::MimicSynthetic || std::filesystem::exists(it->second.path);
}

Dataset load_dataset(const AppConfig& cfg, const std::string& name) {
    const auto it = cfg.datasets.find(name);
    if (it == cfg.datasets.end())
        throw ConfigError("dataset '" + name + "' is not in the manifest");
    const auto& s = it->second;
    switch (s.kind) {
    case DatasetSource::Kind::Csv:
        if (!std::filesystem::exists(s.path))
            throw LoadError("dataset file " + s.path.string() + " does not exist");
        return load_tabular_dataset(s.path, schemas::by_name(s.schema));
    case DatasetSource::Kind::MimicSynthetic:
        return mimic::build_mimic_like_dataset(
            mimic::generate_synthetic_cohort(s.cohort_rows, s.positive_ratio, s.cohort_seed));
    case DatasetSource::Kind::MimicTables:
        return mimic::build_mimic_like_dataset(mimic::load_tables(s.path));
    }
    throw ConfigError("unknown dataset kind");
}

} // namespace dmchain::config

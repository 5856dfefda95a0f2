// Command-line front end: ingest, dpmt, dp, reproduce, ledger verify|audit, catalog.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <json.hpp>

#include "dmchain/config.hpp"
#include "dmchain/error.hpp"
#include "dmchain/orchestrator.hpp"
#include "dmchain/preprocess.hpp"
#include "dmchain/risk.hpp"

namespace fs = std::filesystem;
using namespace dmchain;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kLoad = 2, kTrain = 3, kPolicy = 4, kOther = 5 };

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e))
        return kUsage;
    if (dynamic_cast<const LoadError*>(&e) || dynamic_cast<const NotFoundError*>(&e) ||
        dynamic_cast<const EncodingError*>(&e) || dynamic_cast<const PreprocessError*>(&e))
        return kLoad;
    if (dynamic_cast<const TrainError*>(&e) || dynamic_cast<const CvError*>(&e) ||
        dynamic_cast<const SelectionError*>(&e) || dynamic_cast<const SplitError*>(&e) ||
        dynamic_cast<const DomainError*>(&e))
        return kTrain;
    if (dynamic_cast<const PolicyError*>(&e) || dynamic_cast<const AuthError*>(&e) ||
        dynamic_cast<const RegistrationError*>(&e))
        return kPolicy;
    return kOther;
}

struct Common {
    std::string config_file;
    std::string data_dir = "data";

    config::AppConfig load() const {
        return config_file.empty() ? config::default_config(data_dir) : config::load_config(config_file);
    }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_file, "JSON config with dataset manifest, grids and seeds");
    cmd->add_option("--data-dir", c.data_dir, "directory holding pima.csv / sylhet.csv when no config is given");
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw LoadError("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Inline JSON object, "-" for stdin, or a file path.
std::string read_record(const std::string& arg) {
    const auto first = arg.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && arg[first] == '{')
        return arg;
    if (arg == "-")
        return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    return read_file(arg);
}

// Participant-side key store kept next to the ledger state.
struct Keyring {
    fs::path file;
    std::map<std::string, ledger::KeyPair> keys;

    static Keyring open(const fs::path& dir) {
        Keyring k{dir / "keyring.json", {}};
        if (fs::exists(k.file)) {
            const json j = json::parse(read_file(k.file));
            for (auto it = j.begin(); it != j.end(); ++it)
                k.keys[it.key()] = {it->at("key_pair_id").get<std::string>(), it->at("secret").get<std::string>()};
        }
        return k;
    }
    void save() const {
        json j = json::object();
        for (const auto& [id, kp] : keys)
            j[id] = {{"key_pair_id", kp.key_pair_id}, {"secret", kp.secret}};
        std::ofstream(file, std::ios::trunc) << j.dump(2) << '\n';
    }
};

struct State {
    std::unique_ptr<ledger::Network> net;
    Keyring keyring;
    std::unique_ptr<orchestrator::Service> service;
};

// Opens (or initializes) the persisted network, registering the CA and the
// service participants on first use, and restores the last deployed model.
State open_state(const fs::path& dir, std::size_t sealing_batch) {
    State s;
    ledger::NetworkOptions opt;
    opt.state_dir = dir;
    opt.sealing_batch = sealing_batch;
    s.net = std::make_unique<ledger::Network>(opt);
    s.keyring = Keyring::open(dir);
    if (!s.net->participant("ca")) {
        s.keyring.keys["ca"] = s.net->bootstrap_ca("ca", "ca-identity", "ca-pin");
        const auto sk = orchestrator::register_service(*s.net);
        s.keyring.keys[orchestrator::kPipelineId] = sk.pipeline;
        s.keyring.keys[orchestrator::kAiServiceId] = sk.ai_service;
        s.keyring.save();
    }
    orchestrator::ServiceKeys sk{s.keyring.keys.at(orchestrator::kPipelineId),
                                 s.keyring.keys.at(orchestrator::kAiServiceId)};
    s.service = std::make_unique<orchestrator::Service>(*s.net, sk);
    const auto txs = s.net->transactions();
    for (auto it = txs.rbegin(); it != txs.rend(); ++it)
        if (it->type == ledger::TxType::ModelDeployment && it->status == ledger::TxStatus::Accepted) {
            s.service->restore(orchestrator::load_deployment(*s.net, *it));
            break;
        }
    return s;
}

void print_tx(std::ostream& out, const ledger::Transaction& t) {
    json j = {{"tx_id", to_hex(t.tx_id)},
              {"type", std::string(ledger::to_string(t.type))},
              {"asset", std::string(ledger::to_string(t.asset))},
              {"actor", t.actor},
              {"subject", t.subject},
              {"payload_hash", t.payload_hash ? json(to_hex(*t.payload_hash)) : json(nullptr)},
              {"reference", t.reference},
              {"note", t.note},
              {"timestamp_ms", t.timestamp_ms},
              {"status", std::string(ledger::to_string(t.status))}};
    if (t.status == ledger::TxStatus::Denied)
        j["denial_reason"] = t.denial_reason;
    out << j.dump() << '\n';
}

std::vector<bool> flag_values(const std::string& v) {
    if (v == "on")
        return {true};
    if (v == "off")
        return {false};
    if (v == "both")
        return {false, true};
    throw ConfigError("expected on, off or both, got '" + v + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diabetes risk prediction with a permissioned audit ledger"};
    app.require_subcommand(1);

    Common common;

    // catalog
    auto* cat = app.add_subcommand("catalog", "print the monitoring device tables");
    std::string factor;
    cat->add_option("--factor", factor, "only this risk factor (e.g. glucose, sleep)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "load and validate a dataset, report class counts");
    add_common(ingest, common);
    std::string ingest_name, ingest_out;
    ingest->add_option("dataset", ingest_name, "pima, sylhet or mimic")->required();
    ingest->add_option("--write-clean", ingest_out, "write the rows left after missing-value removal");

    // dpmt
    auto* dpmt = app.add_subcommand("dpmt", "train, tune and deploy a model with ledger logging");
    add_common(dpmt, common);
    std::string state_dir = "dmchain-state", dpmt_dataset, algorithm = "rf";
    bool fs_on = false, bal_on = false;
    std::uint64_t seed = 0;
    dpmt->add_option("--state", state_dir, "ledger/model state directory");
    dpmt->add_option("dataset", dpmt_dataset, "dataset name from the manifest")->required();
    dpmt->add_option("--algorithm", algorithm, "rf, lr or svm");
    dpmt->add_flag("--fs", fs_on, "enable recursive feature elimination");
    dpmt->add_flag("--balance", bal_on, "enable SMOTE on the training split");
    dpmt->add_option("--seed", seed, "split/CV/model seed");

    // dp
    auto* dp = app.add_subcommand("dp", "predict for one record with the deployed model");
    add_common(dp, common);
    std::string record_file, user_id, user_pin = "0000", user_proof;
    dp->add_option("--state", state_dir, "ledger/model state directory");
    dp->add_option("record", record_file, "JSON object of feature values, a file holding one, or - for stdin")->required();
    dp->add_option("--user", user_id, "external user id (registered on first use)")->required();
    dp->add_option("--pin", user_pin, "PIN used when the user is registered");
    dp->add_option("--identity-proof", user_proof, "identity proof used when the user is registered");

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "run the dataset x algorithm x FS x balancing matrix");
    add_common(rep, common);
    std::vector<std::string> rep_datasets{"pima", "sylhet", "mimic"}, rep_algs{"rf", "lr", "svm"};
    std::string rep_fs = "both", rep_bal = "both", rep_json, rep_tables;
    std::vector<std::uint64_t> rep_seeds;
    rep->add_option("--datasets", rep_datasets, "dataset names")->delimiter(',');
    rep->add_option("--algorithms", rep_algs, "rf, lr, svm")->delimiter(',');
    rep->add_option("--fs", rep_fs, "on, off or both");
    rep->add_option("--balance", rep_bal, "on, off or both");
    rep->add_option("--seeds", rep_seeds, "seeds (default from config)")->delimiter(',');
    rep->add_option("--json", rep_json, "write the machine-readable report here");
    rep->add_option("--tables", rep_tables, "write the text tables here instead of stdout");

    // ledger
    auto* led = app.add_subcommand("ledger", "inspect the ledger");
    led->require_subcommand(1);
    auto* verify = led->add_subcommand("verify", "recompute hashes and links");
    std::string channel = ledger::kMainChannel;
    verify->add_option("--state", state_dir, "ledger/model state directory");
    verify->add_option("--channel", channel, "channel name");
    auto* audit = led->add_subcommand("audit", "transactions touching a participant, hash or model version");
    std::string audit_key;
    audit->add_option("--state", state_dir, "ledger/model state directory");
    audit->add_option("--channel", channel, "channel name");
    audit->add_option("key", audit_key, "participant id, tx id, payload hash or model version")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (cat->parsed()) {
            if (factor.empty()) {
                risk::write_catalog_table(std::cout);
            } else {
                const auto f = risk::parse_risk_factor(factor);
                std::cout << "factor\tdevice\tapprox_cost_usd\n";
                for (const auto& e : risk::device_catalog_lookup(f)) {
                    std::cout << risk::to_string(f) << '\t' << e.device_name << '\t';
                    if (e.approx_cost_usd)
                        std::cout << *e.approx_cost_usd;
                    std::cout << '\n';
                }
            }
            return kOk;
        }

        if (ingest->parsed()) {
            const auto cfg = common.load();
            const auto d = config::load_dataset(cfg, ingest_name);
            const auto clean = preprocess::drop_missing_rows(d);
            json j = {{"dataset", ingest_name},
                      {"rows", d.rows.size()},
                      {"positives", d.count_positive()},
                      {"negatives", d.count_negative()},
                      {"rows_after_preprocessing", clean.rows.size()},
                      {"positives_after_preprocessing", clean.count_positive()},
                      {"negatives_after_preprocessing", clean.count_negative()}};
            std::cout << j.dump(2) << '\n';
            if (!ingest_out.empty()) {
                std::ofstream out(ingest_out);
                write_tabular_dataset(out, clean);
            }
            return kOk;
        }

        if (dpmt->parsed()) {
            const auto cfg = common.load();
            auto st = open_state(state_dir, cfg.sealing_batch);
            pipeline::PipelineOptions opt;
            opt.algorithm = models::parse_algorithm(algorithm);
            opt.feature_selection = fs_on;
            opt.balancing = bal_on;
            opt.grid = cfg.grid;
            opt.cv_folds = cfg.cv_folds;
            opt.rfecv_folds = cfg.rfecv_folds;
            opt.train_fraction = cfg.train_fraction;
            opt.smote_k = cfg.smote_k;
            const auto data = config::load_dataset(cfg, dpmt_dataset);
            const auto out = st.service->run_dpmt(data, dpmt_dataset, opt, seed);
            const auto& h = out.result.holdout;
            json j = {{"version", out.deployed->version},
                      {"deployment_tx", to_hex(out.deployed->deployment_tx)},
                      {"artifact_hash", to_hex(out.deployed->artifact_hash)},
                      {"selected_features", out.deployed->prepared.selected_features},
                      {"best_config", h.config},
                      {"cv_accuracy", out.result.grid.best().mean_accuracy},
                      {"holdout",
                       {{"accuracy", h.metrics.accuracy},
                        {"f_measure", h.metrics.f_measure},
                        {"precision_pos", h.metrics.precision_pos},
                        {"recall_pos", h.metrics.recall_pos},
                        {"auc", h.auc},
                        {"confusion",
                         {{"tp", h.confusion.tp}, {"tn", h.confusion.tn}, {"fp", h.confusion.fp}, {"fn", h.confusion.fn}}},
                        {"train_seconds", h.train_seconds}}}};
            std::cout << j.dump(2) << '\n';
            return kOk;
        }

        if (dp->parsed()) {
            const auto cfg = common.load();
            auto st = open_state(state_dir, cfg.sealing_batch);
            if (!st.keyring.keys.count(user_id)) {
                const auto reg = st.net->register_participant(user_id, ledger::Role::ExternalUser,
                                                              user_proof.empty() ? "id:" + user_id : user_proof, user_pin);
                st.keyring.keys[user_id] = reg.keys;
                st.keyring.save();
            }
            const auto r = st.service->run_dp(read_record(record_file), user_id, st.keyring.keys.at(user_id));
            json j = {{"class", r.predicted_class},
                      {"score", r.score},
                      {"model_version", r.model_version},
                      {"input_hash", to_hex(r.input_hash)},
                      {"request_tx", to_hex(r.request_tx)},
                      {"result_tx", to_hex(r.result_tx)}};
            std::cout << j.dump(2) << '\n';
            return kOk;
        }

        if (rep->parsed()) {
            const auto cfg = common.load();
            std::vector<orchestrator::ExperimentSpec> specs;
            for (const auto& d : rep_datasets)
                for (const auto& a : rep_algs)
                    for (bool f : flag_values(rep_fs))
                        for (bool b : flag_values(rep_bal)) {
                            orchestrator::ExperimentSpec s;
                            s.dataset = d;
                            s.algorithm = models::parse_algorithm(a);
                            s.feature_selection = f;
                            s.balancing = b;
                            s.seeds = rep_seeds.empty() ? cfg.seeds : rep_seeds;
                            s.grid = cfg.grid;
                            specs.push_back(std::move(s));
                        }
            pipeline::PipelineOptions base;
            base.cv_folds = cfg.cv_folds;
            base.rfecv_folds = cfg.rfecv_folds;
            base.train_fraction = cfg.train_fraction;
            base.smote_k = cfg.smote_k;
            const auto bundle = orchestrator::reproduce_experiment(specs, orchestrator::manifest_provider(cfg), base);
            if (!rep_json.empty())
                std::ofstream(rep_json, std::ios::trunc) << orchestrator::bundle_to_json(bundle) << '\n';
            if (!rep_tables.empty()) {
                std::ofstream out(rep_tables, std::ios::trunc);
                orchestrator::write_tables(out, bundle);
            } else {
                orchestrator::write_tables(std::cout, bundle);
            }
            return kOk;
        }

        if (verify->parsed()) {
            const auto file = fs::path(state_dir) / "ledger" / (channel + ".blocks");
            const auto blocks = ledger::load_block_file(file);
            const auto v = ledger::verify_blocks(blocks, ledger::load_head_file(file));
            if (v.ok) {
                std::cout << "ok " << blocks.size() << " blocks, head " << to_hex(blocks.back().block_hash) << '\n';
                return kOk;
            }
            std::cout << "tampered at block " << *v.first_bad << ": " << v.reason << '\n';
            return kOther;
        }

        if (audit->parsed()) {
            ledger::NetworkOptions opt;
            opt.state_dir = state_dir;
            if (!fs::exists(fs::path(state_dir) / "registry.json"))
                throw LoadError("no ledger state in " + state_dir);
            ledger::Network net(opt);
            for (const auto& t : net.audit_trail(audit_key, channel))
                print_tx(std::cout, t);
            return kOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kUsage;
}

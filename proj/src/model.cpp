#include "dmchain/model.hpp"

#include <sstream>

#include "dmchain/error.hpp"

namespace dmchain::models {

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
} // namespace

std::string_view to_string(Algorithm a) noexcept {
    switch (a) {
    case Algorithm::RandomForest: return "rf";
    case Algorithm::LogisticRegression: return "lr";
    case Algorithm::Svm: return "svm";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view s) {
    if (s == "rf" || s == "random_forest")
        return Algorithm::RandomForest;
    if (s == "lr" || s == "logistic_regression")
        return Algorithm::LogisticRegression;
    if (s == "svm")
        return Algorithm::Svm;
    throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

Algorithm algorithm_of(const AlgorithmConfig& c) noexcept { return static_cast<Algorithm>(c.index()); }
Algorithm algorithm_of(const AnyModel& m) noexcept { return static_cast<Algorithm>(m.index()); }

AlgorithmConfig default_config(Algorithm a) {
    switch (a) {
    case Algorithm::RandomForest: return ForestConfig{};
    case Algorithm::LogisticRegression: return LogisticConfig{};
    case Algorithm::Svm: return SvmConfig{};
    }
    throw ConfigError("unknown algorithm");
}

std::string describe(const AlgorithmConfig& c) {
    std::ostringstream o;
    o.precision(17);
    std::visit(overloaded{
                   [&](const ForestConfig& f) {
                       o << "n_estimators=" << f.n_estimators << ",criterion=" << to_string(f.criterion)
                         << ",max_features=" << to_string(f.max_features) << ",max_depth=";
                       if (f.max_depth)
                           o << *f.max_depth;
                       else
                           o << "None";
                   },
                   [&](const LogisticConfig& l) { o << "C=" << l.C; },
                   [&](const SvmConfig& s) { o << "C=" << s.C << ",degree=" << s.degree << ",coef0=" << s.coef0; },
               },
               c);
    return o.str();
}

AnyModel train_model(const FeatureMatrix& m, const AlgorithmConfig& cfg, Exec exec) {
    return std::visit(overloaded{
                          [&](const ForestConfig& f) -> AnyModel { return RandomForest::train(m, f, exec); },
                          [&](const LogisticConfig& l) -> AnyModel { return train_logistic_regression(m, l); },
                          [&](const SvmConfig& s) -> AnyModel { return train_svm(m, s, exec); },
                      },
                      cfg);
}

double model_score(const AnyModel& model, std::span<const double> x) {
    return std::visit(overloaded{
                          [&](const RandomForest& f) { return f.predict_proba(x); },
                          [&](const LogisticModel& l) { return l.predict_proba(x); },
                          [&](const SvmModel& s) { return s.decision_value(x); },
                      },
                      model);
}

int model_predict(const AnyModel& model, std::span<const double> x) {
    return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

std::size_t model_feature_count(const AnyModel& model) noexcept {
    return std::visit(overloaded{
                          [](const RandomForest& f) { return f.n_features(); },
                          [](const LogisticModel& l) { return l.coefficients.size(); },
                          [](const SvmModel& s) { return s.n_features; },
                      },
                      model);
}

bool model_converged(const AnyModel& model) noexcept {
    return std::visit(overloaded{
                          [](const RandomForest&) { return true; },
                          [](const LogisticModel& l) { return l.converged; },
                          [](const SvmModel& s) { return s.converged; },
                      },
                      model);
}

} // namespace dmchain::models

#include "dmchain/logistic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "dmchain/error.hpp"

namespace dmchain::models {

void LogisticConfig::validate() const {
    if (!(C > 0.0) || !std::isfinite(C))
        throw ConfigError("logistic regression C must be positive and finite");
    if (!(tol > 0.0))
        throw ConfigError("logistic regression tol must be positive");
    if (max_iter == 0)
        throw ConfigError("logistic regression max_iter must be at least 1");
}

namespace {

double sigmoid(double z) noexcept {
    if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow
double softplus(double z) noexcept { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double linear(double intercept, std::span<const double> coef, std::span<const double> x) noexcept {
    double z = intercept;
    for (std::size_t j = 0; j < coef.size(); ++j)
        z += coef[j] * x[j];
    return z;
}

void check_shape(const FeatureMatrix& m, std::span<const double> coef) {
    if (coef.size() != m.cols())
        throw DomainError("coefficient count does not match the feature count");
}

} // namespace

double LogisticModel::predict_proba(std::span<const double> x) const {
    if (x.size() != coefficients.size())
        throw DomainError("feature vector width does not match the model");
    return sigmoid(linear(intercept, coefficients, x));
}

double penalized_log_likelihood(const FeatureMatrix& m, double intercept, std::span<const double> coef, double C) {
    check_shape(m, coef);
    double ll = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double z = linear(intercept, coef, m.row(i));
        // y log p + (1-y) log(1-p) = y z - log(1 + e^z)
        ll += (m.labels[i] == 1 ? z : 0.0) - softplus(z);
    }
    double sq = 0.0;
    for (double b : coef)
        sq += b * b;
    return ll - sq / (2.0 * C);
}

std::vector<double> penalized_gradient(const FeatureMatrix& m, double intercept, std::span<const double> coef,
                                       double C) {
    check_shape(m, coef);
    std::vector<double> g(coef.size() + 1, 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto x = m.row(i);
        const double r = static_cast<double>(m.labels[i]) - sigmoid(linear(intercept, coef, x));
        g[0] += r;
        for (std::size_t j = 0; j < x.size(); ++j)
            g[j + 1] += r * x[j];
    }
    for (std::size_t j = 0; j < coef.size(); ++j)
        g[j + 1] -= coef[j] / C;
    return g;
}

LogisticModel train_logistic_regression(const FeatureMatrix& m, const LogisticConfig& cfg) {
    cfg.validate();
    m.validate();
    if (m.rows() == 0)
        throw TrainError("cannot train logistic regression on an empty matrix");

    const std::size_t d = m.cols();
    const std::size_t p = d + 1;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));

    auto objective = [&](const Eigen::VectorXd& b) {
        return penalized_log_likelihood(m, b[0], std::span<const double>(b.data() + 1, d), cfg.C);
    };
    auto gradient = [&](const Eigen::VectorXd& b) {
        auto g = penalized_gradient(m, b[0], std::span<const double>(b.data() + 1, d), cfg.C);
        return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(p)));
    };

    LogisticModel model;
    model.C = cfg.C;
    double f = objective(beta);
    model.objective_trace.push_back(f);

    // Tries beta + t*dir for t = 1, 1/2, ...; accepts the first step that does
    // not decrease the objective.
    auto line_search = [&](const Eigen::VectorXd& dir) {
        double t = 1.0;
        for (int k = 0; k < 40; ++k, t *= 0.5) {
            Eigen::VectorXd cand = beta + t * dir;
            const double fc = objective(cand);
            if (std::isfinite(fc) && fc >= f) {
                const bool moved = (cand - beta).lpNorm<Eigen::Infinity>() > 0.0;
                beta = std::move(cand);
                f = fc;
                return moved;
            }
        }
        return false;
    };

    Eigen::VectorXd g = gradient(beta);
    for (model.iterations = 0; model.iterations < cfg.max_iter; ++model.iterations) {
        if (g.lpNorm<Eigen::Infinity>() < cfg.tol) {
            model.converged = true;
            break;
        }
        // Negative Hessian: X' W X + diag(0, 1/C, ..., 1/C)
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        Eigen::VectorXd xi(static_cast<Eigen::Index>(p));
        xi[0] = 1.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const auto x = m.row(i);
            for (std::size_t j = 0; j < d; ++j)
                xi[static_cast<Eigen::Index>(j + 1)] = x[j];
            const double pr = sigmoid(xi.dot(beta));
            H.selfadjointView<Eigen::Lower>().rankUpdate(xi, pr * (1.0 - pr));
        }
        H = H.selfadjointView<Eigen::Lower>();
        for (std::size_t j = 1; j < p; ++j)
            H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += 1.0 / cfg.C;
        H.diagonal().array() += 1e-12;

        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        bool stepped = false;
        if (ldlt.info() == Eigen::Success) {
            Eigen::VectorXd dir = ldlt.solve(g);
            if (dir.allFinite())
                stepped = line_search(dir);
        }
        if (!stepped)
            stepped = line_search(g / std::max(1.0, static_cast<double>(m.rows())));
        g = gradient(beta);
        if (!stepped) {
            // no ascent direction improves the objective at double precision
            model.converged = g.lpNorm<Eigen::Infinity>() < cfg.tol;
            break;
        }
        model.objective_trace.push_back(f);
    }
    if (!model.converged && g.lpNorm<Eigen::Infinity>() < cfg.tol)
        model.converged = true;

    model.gradient_norm = g.lpNorm<Eigen::Infinity>();
    model.intercept = beta[0];
    model.coefficients.assign(beta.data() + 1, beta.data() + p);
    return model;
}

} // namespace dmchain::models

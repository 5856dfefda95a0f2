#include "dmchain/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "dmchain/error.hpp"

namespace dmchain::models {

void SvmConfig::validate() const {
    if (!(C > 0.0) || !std::isfinite(C))
        throw ConfigError("SVM C must be positive and finite");
    if (degree < 1)
        throw ConfigError("SVM polynomial degree must be at least 1");
    if (!std::isfinite(coef0))
        throw ConfigError("SVM coef0 must be finite");
    if (!(tol > 0.0))
        throw ConfigError("SVM tol must be positive");
}

double polynomial_kernel(std::span<const double> u, std::span<const double> v, int degree, double coef0) noexcept {
    double dot = coef0;
    for (std::size_t j = 0; j < u.size(); ++j)
        dot += u[j] * v[j];
    double r = 1.0;
    for (int k = 0; k < degree; ++k)
        r *= dot;
    return r;
}

namespace {

void fill_row(const FeatureMatrix& m, std::size_t i, int degree, double coef0, double* out, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(m.rows());
    const auto xi = m.row(i);
    if (exec == Exec::Parallel && n >= 512 && !in_parallel_region()) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t j = 0; j < n; ++j)
            out[j] = polynomial_kernel(xi, m.row(static_cast<std::size_t>(j)), degree, coef0);
    } else {
        for (std::ptrdiff_t j = 0; j < n; ++j)
            out[j] = polynomial_kernel(xi, m.row(static_cast<std::size_t>(j)), degree, coef0);
    }
}

// Kernel rows on demand: the whole Gram matrix when it fits the budget,
// otherwise a least-recently-used set of rows.
class KernelRows {
public:
    KernelRows(const FeatureMatrix& m, const SvmConfig& cfg, Exec exec) : m_(m), cfg_(cfg), exec_(exec) {
        const std::size_t n = m.rows();
        const std::size_t budget = std::max<std::size_t>(cfg.cache_mb, 1) * 1024 * 1024 / sizeof(double);
        if (n * n <= budget) {
            full_ = kernel_matrix(m, cfg.degree, cfg.coef0, exec);
        } else {
            capacity_ = std::max<std::size_t>(2, budget / n);
        }
        diag_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            diag_[i] = polynomial_kernel(m.row(i), m.row(i), cfg.degree, cfg.coef0);
    }

    const double* row(std::size_t i) {
        if (!full_.empty())
            return full_.data() + i * m_.rows();
        if (auto it = where_.find(i); it != where_.end()) {
            order_.splice(order_.begin(), order_, it->second);
            return it->second->second.data();
        }
        std::vector<double> buf;
        if (order_.size() >= capacity_) {
            buf = std::move(order_.back().second);
            where_.erase(order_.back().first);
            order_.pop_back();
        }
        buf.resize(m_.rows());
        fill_row(m_, i, cfg_.degree, cfg_.coef0, buf.data(), exec_);
        order_.emplace_front(i, std::move(buf));
        where_[i] = order_.begin();
        return order_.front().second.data();
    }

    double diag(std::size_t i) const noexcept { return diag_[i]; }

private:
    const FeatureMatrix& m_;
    const SvmConfig& cfg_;
    Exec exec_;
    std::vector<double> full_;
    std::vector<double> diag_;
    std::size_t capacity_ = 0;
    std::list<std::pair<std::size_t, std::vector<double>>> order_;
    std::unordered_map<std::size_t, decltype(order_)::iterator> where_;
};

constexpr double kTau = 1e-12;

} // namespace

std::vector<double> kernel_matrix(const FeatureMatrix& m, int degree, double coef0, Exec exec) {
    const std::size_t n = m.rows();
    std::vector<double> k(n * n);
    const auto rows = static_cast<std::ptrdiff_t>(n);
    if (exec == Exec::Parallel && !in_parallel_region()) {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t i = 0; i < rows; ++i)
            fill_row(m, static_cast<std::size_t>(i), degree, coef0, k.data() + i * rows, Exec::Serial);
    } else {
        for (std::ptrdiff_t i = 0; i < rows; ++i)
            fill_row(m, static_cast<std::size_t>(i), degree, coef0, k.data() + i * rows, Exec::Serial);
    }
    return k;
}

double SvmModel::decision_value(std::span<const double> x) const {
    if (x.size() != n_features)
        throw DomainError("feature vector width does not match the model");
    double s = bias;
    for (std::size_t k = 0; k < dual_coef.size(); ++k)
        s += dual_coef[k] * polynomial_kernel(support_vector(k), x, degree, coef0);
    return s;
}

SvmTrainResult train_svm_detailed(const FeatureMatrix& m, const SvmConfig& cfg, Exec exec) {
    cfg.validate();
    m.validate();
    const std::size_t n = m.rows();
    const std::size_t pos = m.count_positive();
    if (pos == 0 || pos == n)
        throw TrainError("SVM training needs both classes");

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = m.labels[i] == 1 ? 1.0 : -1.0;

    KernelRows K(m, cfg, exec);
    const double C = cfg.C;
    std::vector<double> alpha(n, 0.0);
    // gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij
    std::vector<double> G(n, -1.0);
    auto upper = [&](std::size_t t) { return alpha[t] >= C; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    const std::size_t max_iter = cfg.max_iter ? cfg.max_iter : std::max<std::size_t>(10'000'000, 100 * n);
    std::size_t iter = 0;
    bool converged = false;
    constexpr auto npos = std::numeric_limits<std::size_t>::max();

    for (; iter < max_iter; ++iter) {
        // maximal violating pair with second-order choice of j
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::size_t i = npos;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] > 0) {
                if (!upper(t) && -G[t] >= gmax) {
                    gmax = -G[t];
                    i = t;
                }
            } else if (!lower(t) && G[t] >= gmax) {
                gmax = G[t];
                i = t;
            }
        }
        std::size_t j = npos;
        double best = std::numeric_limits<double>::infinity();
        const double* Ki = i != npos ? K.row(i) : nullptr;
        for (std::size_t t = 0; t < n && Ki; ++t) {
            if (y[t] > 0) {
                if (lower(t))
                    continue;
                gmax2 = std::max(gmax2, G[t]);
                const double diff = gmax + G[t];
                if (diff > 0) {
                    const double quad = K.diag(i) + K.diag(t) - 2.0 * y[i] * y[t] * y[i] * Ki[t];
                    const double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
                    if (obj <= best) {
                        best = obj;
                        j = t;
                    }
                }
            } else {
                if (upper(t))
                    continue;
                gmax2 = std::max(gmax2, -G[t]);
                const double diff = gmax - G[t];
                if (diff > 0) {
                    const double quad = K.diag(i) + K.diag(t) + 2.0 * y[i] * y[t] * y[i] * Ki[t];
                    const double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
                    if (obj <= best) {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        if (i == npos || j == npos || gmax + gmax2 < cfg.tol) {
            converged = true;
            break;
        }

        const double* Kj = K.row(j);
        Ki = K.row(i); // the LRU may have recycled row i while fetching row j
        const double Qij = y[i] * y[j] * Ki[j];
        const double old_i = alpha[i];
        const double old_j = alpha[j];
        double& ai = alpha[i];
        double& aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = K.diag(i) + K.diag(j) + 2.0 * Qij;
            if (quad <= 0)
                quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0) {
                if (aj < 0) {
                    aj = 0;
                    ai = diff;
                }
            } else if (ai < 0) {
                ai = 0;
                aj = -diff;
            }
            if (diff > 0) {
                if (ai > C) {
                    ai = C;
                    aj = C - diff;
                }
            } else if (aj > C) {
                aj = C;
                ai = C + diff;
            }
        } else {
            double quad = K.diag(i) + K.diag(j) - 2.0 * Qij;
            if (quad <= 0)
                quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > C) {
                if (ai > C) {
                    ai = C;
                    aj = sum - C;
                }
            } else if (aj < 0) {
                aj = 0;
                ai = sum;
            }
            if (sum > C) {
                if (aj > C) {
                    aj = C;
                    ai = sum - C;
                }
            } else if (ai < 0) {
                ai = 0;
                aj = sum;
            }
        }
        const double di = ai - old_i;
        const double dj = aj - old_j;
        for (std::size_t t = 0; t < n; ++t)
            G[t] += y[t] * (y[i] * Ki[t] * di + y[j] * Kj[t] * dj);
    }

    // offset from free multipliers, midpoint of the feasible range otherwise
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * G[t];
        if (upper(t)) {
            if (y[t] < 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] > 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    SvmTrainResult res;
    SvmModel& mdl = res.model;
    mdl.n_features = m.cols();
    mdl.bias = -rho;
    mdl.degree = cfg.degree;
    mdl.coef0 = cfg.coef0;
    mdl.C = C;
    mdl.converged = converged;
    mdl.iterations = iter;
    double f = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        f += alpha[t] * (G[t] - 1.0);
        if (alpha[t] > 0.0) {
            const auto x = m.row(t);
            mdl.support_vectors.insert(mdl.support_vectors.end(), x.begin(), x.end());
            mdl.dual_coef.push_back(alpha[t] * y[t]);
        }
    }
    mdl.dual_objective = -f / 2.0;
    res.alpha = std::move(alpha);
    res.y = std::move(y);
    return res;
}

} // namespace dmchain::models

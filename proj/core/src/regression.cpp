#include "finsent/regression.hpp"

#include <cmath>

namespace finsent {

LinearFit fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ContractError("ridge strength must be finite and >= 0");
    if (x.rows() != y.size()) throw ContractError("feature rows and targets differ in length");
    if (x.rows() < 2) throw ContractError("linear fit needs at least 2 rows");
    if (!x.allFinite() || !y.allFinite()) throw ContractError("linear fit needs finite inputs");

    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    LinearFit fit;
    fit.lambda = lambda;
    fit.mean = Eigen::VectorXd::Zero(p);
    fit.scale = Eigen::VectorXd::Ones(p);
    fit.constant.assign(static_cast<std::size_t>(p), false);

    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto col = x.col(j);
        if (col.maxCoeff() == col.minCoeff()) {
            fit.constant[static_cast<std::size_t>(j)] = true;
            continue;
        }
        const double m = col.mean();
        const double sd = std::sqrt((col.array() - m).square().sum() / static_cast<double>(n));
        fit.mean(j) = m;
        fit.scale(j) = sd;
        active.push_back(j);
    }

    const double y_mean = y.mean();
    fit.std_weights = Eigen::VectorXd::Zero(p);
    fit.std_intercept = y_mean;

    if (!active.empty()) {
        const auto k = static_cast<Eigen::Index>(active.size());
        Eigen::MatrixXd z(n, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            const Eigen::Index j = active[static_cast<std::size_t>(a)];
            z.col(a) = (x.col(j).array() - fit.mean(j)) / fit.scale(j);
        }
        Eigen::MatrixXd gram = z.transpose() * z;
        gram.diagonal().array() += lambda;
        const Eigen::VectorXd rhs = z.transpose() * (y.array() - y_mean).matrix();

        const Eigen::LLT<Eigen::MatrixXd> llt(gram);
        const bool singular = llt.info() != Eigen::Success || (lambda == 0.0 && llt.rcond() < 1e-12);
        if (singular) {
            throw NumericError("normal equations are singular (collinear features); use a ridge strength > 0");
        }
        const Eigen::VectorXd w = llt.solve(rhs);
        for (Eigen::Index a = 0; a < k; ++a) fit.std_weights(active[static_cast<std::size_t>(a)]) = w(a);
    }

    fit.weights = Eigen::VectorXd::Zero(p);
    fit.intercept = y_mean;
    for (Eigen::Index j : active) {
        fit.weights(j) = fit.std_weights(j) / fit.scale(j);
        fit.intercept -= fit.weights(j) * fit.mean(j);
    }
    return fit;
}

Eigen::VectorXd predict(const LinearFit& fit, const Eigen::MatrixXd& x) {
    if (x.rows() == 0) return Eigen::VectorXd(0);
    if (x.cols() != fit.n_features()) {
        throw ContractError("model expects " + std::to_string(fit.n_features()) + " features, got " +
                            std::to_string(x.cols()));
    }
    // Standardized route, matching how the weights were solved.
    const Eigen::MatrixXd z = (x.rowwise() - fit.mean.transpose()).array().rowwise() / fit.scale.transpose().array();
    return (z * fit.std_weights).array() + fit.std_intercept;
}

LinearRegressor::LinearRegressor(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0)) throw ContractError("ridge strength must be >= 0");
}

std::string LinearRegressor::name() const {
    return lambda_ == 0.0 ? "linear" : "ridge(" + format_double(lambda_) + ")";
}

std::string LinearRegressor::params() const {
    return "lambda=" + format_double(lambda_) + ";standardize=train";
}

void LinearRegressor::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    fit_ = fit_linear(x, y, lambda_);
}

Eigen::VectorXd LinearRegressor::predict(const Eigen::MatrixXd& x) const {
    if (!fit_) throw ContractError("regressor used before fit");
    return finsent::predict(*fit_, x);
}

RegressorSpec linear_regressor_spec(double lambda) {
    return {LinearRegressor(lambda).name(), [lambda] { return std::make_unique<LinearRegressor>(lambda); }};
}

}  // namespace finsent

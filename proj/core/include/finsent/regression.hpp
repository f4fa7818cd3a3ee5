#pragma once

#include "finsent/common.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace finsent {

/// Closed-form ridge fit on standardized features. Weights and intercept are
/// also reported in original feature units.
struct LinearFit {
    double lambda = 0.0;
    Eigen::VectorXd mean;         // train column means (0 for constant columns)
    Eigen::VectorXd scale;        // train column std devs (1 for constant columns)
    std::vector<bool> constant;   // constant columns get weight 0
    Eigen::VectorXd std_weights;  // in standardized units
    double std_intercept = 0.0;
    Eigen::VectorXd weights;      // in original units
    double intercept = 0.0;

    [[nodiscard]] Eigen::Index n_features() const noexcept { return mean.size(); }
};

/// Minimizes sum (y - Zw - b)^2 + lambda * |w|^2 where Z holds the train
/// columns standardized by their mean and population std dev. Constant
/// columns are absorbed by the intercept. Throws NumericError when
/// lambda = 0 and the system is singular, ContractError on bad shapes.
[[nodiscard]] LinearFit fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);

/// Throws ContractError when the column count differs from the fit.
[[nodiscard]] Eigen::VectorXd predict(const LinearFit& fit, const Eigen::MatrixXd& x);

/// Regressor plug-in contract: fit/predict over real matrices. Plug-ins with
/// internal randomness must take an explicit seed at construction.
class Regressor {
public:
    virtual ~Regressor() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    /// Hyperparameters as recorded in report metadata.
    [[nodiscard]] virtual std::string params() const { return {}; }
    virtual void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) = 0;
    [[nodiscard]] virtual Eigen::VectorXd predict(const Eigen::MatrixXd& x) const = 0;
};

struct RegressorSpec {
    std::string name;
    std::function<std::unique_ptr<Regressor>()> make;
};

class LinearRegressor final : public Regressor {
public:
    explicit LinearRegressor(double lambda = 0.0);

    /// "linear" for lambda 0, otherwise "ridge(<lambda>)".
    [[nodiscard]] std::string name() const override;
    [[nodiscard]] std::string params() const override;
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) override;
    [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override;
    [[nodiscard]] const std::optional<LinearFit>& fitted() const noexcept { return fit_; }

private:
    double lambda_;
    std::optional<LinearFit> fit_;
};

[[nodiscard]] RegressorSpec linear_regressor_spec(double lambda);

}  // namespace finsent

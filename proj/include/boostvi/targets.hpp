#pragma once

#include <string>

#include "boostvi/lmo.hpp"
#include "boostvi/objective.hpp"

namespace bvi {

/// Heavy-tailed benchmark posterior, renormalized over a 1-D box.
class CauchyTarget {
public:
    CauchyTarget(double location, double scale, SupportBox box);

    double location() const noexcept { return location_; }
    double scale() const noexcept { return scale_; }
    const SupportBox& box() const noexcept { return box_; }

    /// Closed-form mass of the untruncated density inside the box.
    double box_mass() const;

    /// Renormalized over the box; a normalized analytic density.
    TargetPosterior truncated() const;
    /// The full-line density, for truncation-loss computations.
    TargetPosterior untruncated() const;

private:
    double location_;
    double scale_;
    SupportBox box_;
};

struct GaussMixComponent {
    double weight;
    Vec mean;
    double sigma;
};

/// Mixture of isotropic Gaussians, renormalized as a whole over the box
/// (truncate first, then normalize the mixture).
class GaussMixTarget {
public:
    GaussMixTarget(std::vector<GaussMixComponent> components, SupportBox box);

    const std::vector<GaussMixComponent>& components() const noexcept { return components_; }
    const SupportBox& box() const noexcept { return box_; }

    double box_mass() const;
    TargetPosterior truncated() const;
    TargetPosterior untruncated() const;

private:
    std::vector<GaussMixComponent> components_;
    SupportBox box_;
};

/// Binary classification dataset: one label in {0,1} plus a feature vector
/// per record; the first `train_count` records form the training split.
struct Dataset {
    std::vector<int> labels;
    std::vector<Vec> features;
    std::size_t train_count = 0;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return features.empty() ? 0 : features.front().size(); }
    std::size_t test_count() const noexcept { return size() - train_count; }
};

struct DatasetFormat {
    std::size_t train_count = 0; // 0 = everything is training data
};

/// CSV rows `label,f1,...,fd`; a leading header line is detected by a
/// non-numeric first token. Errors carry the offending line number.
Dataset load_dataset(const std::string& path, const DatasetFormat& format = {});
Dataset parse_dataset_text(const std::string& text, const DatasetFormat& format = {});

/// Synthetic stand-in with the ChemReact shape: d features, labels from a
/// noisy linear rule. Deterministic per seed.
Dataset generate_chemreact_like(std::size_t n, std::size_t d, std::uint64_t seed,
                                std::size_t train_count);

/// Bayesian logistic regression with a spherical Gaussian prior on the
/// coefficients.
class LogisticRegressionModel {
public:
    LogisticRegressionModel(Dataset data, double prior_sigma = 1.0);

    const Dataset& data() const noexcept { return data_; }
    std::size_t dim() const noexcept { return data_.dim(); }
    double prior_sigma() const noexcept { return prior_sigma_; }

    /// log p(y_train | w; X_train) + log N(w; 0, prior_sigma^2 I).
    double log_joint(std::span<const double> w) const;

    TargetPosterior joint() const;

private:
    Dataset data_;
    double prior_sigma_;
};

/// Predictive scores (posterior-mean sigmoid under q) ranked into the AUC of
/// the ROC curve, midrank tie handling. Throws on a single-class test split.
double predictive_auc(const LogisticRegressionModel& model, const MixtureDensity& q,
                      const Dataset& test, std::size_t n_mc, std::uint64_t seed);

/// Rank-statistic AUC of raw scores (exposed for reuse and testing).
double auc_from_scores(const std::vector<double>& scores, const std::vector<int>& labels);

/// One-component fit used to initialize boosting: the stochastic LMO run
/// against the target from a flat (uniform over the box) iterate.
MixtureDensity meanfield_init(const TargetPosterior& target, const AtomFamilyConfig& family,
                              const LmoConfig& cfg);

} // namespace bvi

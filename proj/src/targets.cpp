#include "boostvi/targets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "boostvi/errors.hpp"
#include "boostvi/normal.hpp"

namespace bvi {

namespace {

double log_sigmoid(double a) {
    // log(1/(1+e^-a)) without overflow on either side
    return a >= 0.0 ? -std::log1p(std::exp(-a)) : a - std::log1p(std::exp(a));
}

} // namespace

CauchyTarget::CauchyTarget(double location, double scale, SupportBox box)
    : location_(location), scale_(scale), box_(std::move(box)) {
    if (box_.dim() != 1) throw ArgumentError("cauchy target: one-dimensional only");
    if (!(scale_ > 0.0)) throw ArgumentError("cauchy target: scale must be positive");
}

double CauchyTarget::box_mass() const {
    const double a = (box_.lower()[0] - location_) / scale_;
    const double b = (box_.upper()[0] - location_) / scale_;
    return (std::atan(b) - std::atan(a)) / M_PI;
}

TargetPosterior CauchyTarget::untruncated() const {
    const double loc = location_, sc = scale_;
    return TargetPosterior(
        TargetPosterior::Kind::AnalyticDensity, 1,
        [loc, sc](std::span<const double> z) {
            const double t = (z[0] - loc) / sc;
            return -std::log(M_PI * sc * (1.0 + t * t));
        },
        true);
}

TargetPosterior CauchyTarget::truncated() const {
    const double loc = location_, sc = scale_;
    const double log_mass = std::log(box_mass());
    return TargetPosterior(
        TargetPosterior::Kind::AnalyticDensity, 1,
        [loc, sc, log_mass](std::span<const double> z) {
            const double t = (z[0] - loc) / sc;
            return -std::log(M_PI * sc * (1.0 + t * t)) - log_mass;
        },
        true);
}

GaussMixTarget::GaussMixTarget(std::vector<GaussMixComponent> components, SupportBox box)
    : components_(std::move(components)), box_(std::move(box)) {
    if (components_.empty()) throw ArgumentError("gauss mix target: needs components");
    double sum = 0.0;
    for (const auto& c : components_) {
        if (c.mean.size() != box_.dim())
            throw ArgumentError("gauss mix target: component dimension mismatch");
        if (!(c.sigma > 0.0)) throw ArgumentError("gauss mix target: sigma must be positive");
        if (!(c.weight > 0.0)) throw ArgumentError("gauss mix target: weights must be positive");
        sum += c.weight;
    }
    for (auto& c : components_) c.weight /= sum;
}

double GaussMixTarget::box_mass() const {
    double m = 0.0;
    for (const auto& c : components_) m += c.weight * truncation_mass(c.mean, c.sigma, box_);
    return m;
}

namespace {

double gauss_mix_log_pdf(const std::vector<GaussMixComponent>& comps,
                         std::span<const double> z) {
    const std::size_t d = z.size();
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
        double r2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double t = z[k] - comps[i].mean[k];
            r2 += t * t;
        }
        const double s = comps[i].sigma;
        terms[i] = std::log(comps[i].weight) - static_cast<double>(d) * std::log(s) -
                   0.5 * static_cast<double>(d) * kLog2Pi - 0.5 * r2 / (s * s);
        max_term = std::max(max_term, terms[i]);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc);
}

} // namespace

TargetPosterior GaussMixTarget::untruncated() const {
    auto comps = components_;
    return TargetPosterior(
        TargetPosterior::Kind::AnalyticDensity, box_.dim(),
        [comps](std::span<const double> z) { return gauss_mix_log_pdf(comps, z); }, true);
}

TargetPosterior GaussMixTarget::truncated() const {
    auto comps = components_;
    const double log_mass = std::log(box_mass());
    return TargetPosterior(
        TargetPosterior::Kind::AnalyticDensity, box_.dim(),
        [comps, log_mass](std::span<const double> z) {
            return gauss_mix_log_pdf(comps, z) - log_mass;
        },
        true);
}

Dataset parse_dataset_text(const std::string& text, const DatasetFormat& format) {
    Dataset out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> tokens;
        std::stringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) tokens.push_back(tok);

        const auto parse_num = [&](const std::string& s, double& v) {
            std::size_t pos = 0;
            try {
                v = std::stod(s, &pos);
            } catch (const std::exception&) {
                return false;
            }
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
            return pos == s.size();
        };

        double label_val;
        if (first_content_line && !parse_num(tokens[0], label_val)) {
            first_content_line = false; // header row
            continue;
        }
        first_content_line = false;

        if (tokens.size() < 2)
            throw ArgumentError("dataset: line " + std::to_string(line_no) +
                                ": expected label plus at least one feature");
        if (!parse_num(tokens[0], label_val))
            throw ArgumentError("dataset: line " + std::to_string(line_no) +
                                ": malformed label '" + tokens[0] + "'");
        if (label_val != 0.0 && label_val != 1.0)
            throw ArgumentError("dataset: line " + std::to_string(line_no) +
                                ": label must be 0 or 1");
        Vec feats(tokens.size() - 1);
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            double v;
            if (!parse_num(tokens[i], v) || !std::isfinite(v))
                throw ArgumentError("dataset: line " + std::to_string(line_no) +
                                    ": malformed feature '" + tokens[i] + "'");
            feats[i - 1] = v;
        }
        if (dim == 0) dim = feats.size();
        if (feats.size() != dim)
            throw ArgumentError("dataset: line " + std::to_string(line_no) +
                                ": inconsistent feature count");
        out.labels.push_back(static_cast<int>(label_val));
        out.features.push_back(std::move(feats));
    }
    if (out.labels.empty()) throw ArgumentError("dataset: no records found");
    if (format.train_count > out.size())
        throw ArgumentError("dataset: declared train count exceeds record count");
    out.train_count = format.train_count == 0 ? out.size() : format.train_count;
    return out;
}

Dataset load_dataset(const std::string& path, const DatasetFormat& format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("dataset: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset_text(buf.str(), format);
}

Dataset generate_chemreact_like(std::size_t n, std::size_t d, std::uint64_t seed,
                                std::size_t train_count) {
    if (n < 2 || d < 1) throw ArgumentError("dataset generator: need n >= 2, d >= 1");
    Rng rng(seed);
    // latent linear rule with moderate norm; labels flip with small noise
    Vec w(d);
    for (double& v : w) v = (rng.uniform() * 2.0 - 1.0);
    double norm = 0.0;
    for (double v : w) norm += v * v;
    const double scale = 2.0 / std::sqrt(norm);
    for (double& v : w) v *= scale;

    Dataset out;
    out.labels.resize(n);
    out.features.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec x(d);
        for (double& v : x) {
            // Box-Muller from the pinned uniform stream
            const double u1 = std::max(rng.uniform(), 1e-300);
            const double u2 = rng.uniform();
            v = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        }
        double a = 0.0;
        for (std::size_t k = 0; k < d; ++k) a += w[k] * x[k];
        const double p = 1.0 / (1.0 + std::exp(-a));
        out.labels[i] = rng.uniform() < p ? 1 : 0;
        out.features[i] = std::move(x);
    }
    if (train_count == 0 || train_count > n) train_count = n;
    out.train_count = train_count;
    return out;
}

LogisticRegressionModel::LogisticRegressionModel(Dataset data, double prior_sigma)
    : data_(std::move(data)), prior_sigma_(prior_sigma) {
    if (!(prior_sigma_ > 0.0)) throw ArgumentError("logreg: prior sigma must be positive");
    for (const auto& f : data_.features) {
        for (double v : f)
            if (std::isnan(v)) throw ArgumentError("logreg: NaN feature");
    }
}

double LogisticRegressionModel::log_joint(std::span<const double> w) const {
    if (w.size() != dim()) throw ArgumentError("logreg: weight dimension mismatch");
    double ll = 0.0;
    for (std::size_t i = 0; i < data_.train_count; ++i) {
        double a = 0.0;
        const Vec& x = data_.features[i];
        for (std::size_t k = 0; k < w.size(); ++k) a += x[k] * w[k];
        // Bernoulli log likelihood in the stable form
        ll += data_.labels[i] == 1 ? log_sigmoid(a) : log_sigmoid(-a);
    }
    double prior = 0.0;
    const double s2 = prior_sigma_ * prior_sigma_;
    for (double v : w) prior += v * v;
    prior = -0.5 * prior / s2 -
            0.5 * static_cast<double>(w.size()) * (kLog2Pi + 2.0 * std::log(prior_sigma_));
    return ll + prior;
}

TargetPosterior LogisticRegressionModel::joint() const {
    // the evaluator owns a copy; the model handed in may be a temporary
    auto self = std::make_shared<LogisticRegressionModel>(*this);
    return TargetPosterior(
        TargetPosterior::Kind::BayesianJoint, self->dim(),
        [self](std::span<const double> w) { return self->log_joint(w); }, false);
}

double auc_from_scores(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw ArgumentError("auc: scores and labels must match and be non-empty");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += (y == 1);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw ArgumentError("auc: undefined for a single-class test set");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // midranks over tied score groups
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }
    double rank_sum_pos = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (labels[k] == 1) rank_sum_pos += rank[k];
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double predictive_auc(const LogisticRegressionModel& model, const MixtureDensity& q,
                      const Dataset& test, std::size_t n_mc, std::uint64_t seed) {
    if (q.dim() != model.dim()) throw ArgumentError("auc: posterior dimension mismatch");
    if (test.size() == 0) throw ArgumentError("auc: empty test set");
    if (n_mc < 1) throw ArgumentError("auc: needs at least one posterior sample");

    const std::vector<Vec> ws = q.sample(n_mc, seed);
    std::vector<double> scores(test.size(), 0.0);
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Vec& x = test.features[i];
        double acc = 0.0;
        for (const Vec& w : ws) {
            double a = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) a += x[k] * w[k];
            acc += 1.0 / (1.0 + std::exp(-a));
        }
        scores[i] = acc / static_cast<double>(n_mc);
    }
    return auc_from_scores(scores, test.labels);
}

MixtureDensity meanfield_init(const TargetPosterior& target, const AtomFamilyConfig& family,
                              const LmoConfig& cfg) {
    // gradient at the flat iterate: log uniform - log target
    const double log_leb = std::log(family.box.lebesgue_measure());
    const PointFn g = [&, log_leb](std::span<const double> z) {
        return -log_leb - target.log_target(z);
    };
    const LmoResult fit = stochastic_lmo_fn(g, cfg, family);
    return MixtureDensity(fit.atom);
}

} // namespace bvi

#include "centershift/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "centershift/centers.hpp"
#include "centershift/errors.hpp"
#include "centershift/losses.hpp"
#include "centershift/matrix.hpp"
#include "centershift/mlp.hpp"
#include "centershift/rng.hpp"

namespace centershift {

namespace {

constexpr std::size_t kBatch = 4;
constexpr std::size_t kInputDim = 5;
constexpr std::size_t kEmbedDim = 3;
constexpr std::size_t kClasses = 3;
constexpr double kHingeGuard = 2e-2;   // distance of hinge inputs from zero
constexpr double kArgminGuard = 2e-2;  // gap between best and second-best negative
constexpr double kReluGuard = 1e-3;    // distance of pre-activations from zero

struct Instance {
    Matrix2D source_inputs;   // kBatch x kInputDim
    Matrix2D target_inputs;   // kBatch x kInputDim
    Matrix2D features;        // kBatch x kEmbedDim, for direct loss checks
    Matrix2D target_features;
    std::vector<std::size_t> labels;
    std::vector<std::size_t> pseudo_labels;
    std::vector<double> weights;
    Matrix2D centers;  // kClasses x kEmbedDim
    Matrix2D second_centers;
    MLPParams generator;
    MLPParams discriminator;
    MLPParams head;
    Margins margins{0.2, 1.2};
    double lambda_t = 2.5;
    double lambda_d = 0.7;
};

Matrix2D random_matrix(std::size_t rows, std::size_t cols, double sigma, Rng& rng) {
    Matrix2D m(rows, cols);
    for (double& v : m.data) v = rng.normal(0.0, sigma);
    return m;
}

bool hinge_safe(const Matrix2D& features, std::span<const std::size_t> labels,
                const Matrix2D& centers, const Margins& margins) {
    for (std::size_t i = 0; i < features.rows; ++i) {
        const auto f = features.row(i);
        const double d_pos = squared_euclidean(f, centers.row(labels[i]));
        if (std::abs(d_pos - margins.alpha) < kHingeGuard) return false;
        double best = -1.0;
        double second = -1.0;
        for (std::size_t j = 0; j < centers.rows; ++j) {
            if (j == labels[i]) continue;
            const double d = squared_euclidean(f, centers.row(j));
            if (best < 0.0 || d < best) {
                second = best;
                best = d;
            } else if (second < 0.0 || d < second) {
                second = d;
            }
        }
        if (std::abs(margins.beta - best) < kHingeGuard) return false;
        if (second >= 0.0 && second - best < kArgminGuard) return false;
    }
    return true;
}

bool relu_safe(const MLPParams& net, const Matrix2D& inputs) {
    ForwardCache cache;
    forward(net, inputs, &cache);
    for (std::size_t l = 0; l + 1 < cache.pre_activations.size(); ++l) {
        for (double z : cache.pre_activations[l].data) {
            if (std::abs(z) < kReluGuard) return false;
        }
    }
    return true;
}

Instance make_instance(std::size_t index) {
    // Deterministic rejection sampling: bump the sub-seed until every hinge,
    // argmin gap and relu pre-activation clears its guard band.
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(0x9000 + 977 * index + attempt);
        Instance inst;
        inst.source_inputs = random_matrix(kBatch, kInputDim, 1.0, rng);
        inst.target_inputs = random_matrix(kBatch, kInputDim, 1.0, rng);
        inst.features = random_matrix(kBatch, kEmbedDim, 0.5, rng);
        inst.target_features = random_matrix(kBatch, kEmbedDim, 0.5, rng);
        inst.centers = random_matrix(kClasses, kEmbedDim, 0.5, rng);
        inst.second_centers = random_matrix(kClasses, kEmbedDim, 0.5, rng);
        inst.labels.resize(kBatch);
        inst.pseudo_labels.resize(kBatch);
        inst.weights.resize(kBatch);
        for (std::size_t i = 0; i < kBatch; ++i) {
            inst.labels[i] = rng.index(kClasses);
            inst.pseudo_labels[i] = rng.index(kClasses);
            inst.weights[i] = rng.uniform(0.1, 1.0);
        }
        inst.generator = init_mlp({kInputDim, 6, kEmbedDim}, OutputActivation::identity, rng);
        inst.discriminator = init_mlp({kEmbedDim, 5, 1}, OutputActivation::sigmoid, rng);
        inst.head = init_mlp({kEmbedDim, kClasses}, OutputActivation::identity, rng);

        if (!hinge_safe(inst.features, inst.labels, inst.centers, inst.margins)) continue;
        if (!hinge_safe(inst.target_features, inst.pseudo_labels, inst.centers, inst.margins)) {
            continue;
        }
        if (!relu_safe(inst.generator, inst.source_inputs)) continue;
        if (!relu_safe(inst.generator, inst.target_inputs)) continue;

        const Matrix2D gen_source = forward(inst.generator, inst.source_inputs);
        const Matrix2D gen_target = forward(inst.generator, inst.target_inputs);
        if (!relu_safe(inst.discriminator, gen_source)) continue;
        if (!relu_safe(inst.discriminator, gen_target)) continue;
        if (!hinge_safe(gen_source, inst.labels, inst.centers, inst.margins)) continue;
        if (!hinge_safe(gen_target, inst.pseudo_labels, inst.centers, inst.margins)) continue;
        return inst;
    }
}

double rel_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1.0});
    return std::abs(analytic - numeric) / denom;
}

double max_rel_error(std::span<const double> analytic, std::span<const double> numeric,
                     double perturbation) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double a = analytic[i] + (i == 0 ? perturbation : 0.0);
        worst = std::max(worst, rel_error(a, numeric[i]));
    }
    return worst;
}

std::vector<double> flatten_grads(const MLPGrads& grads) {
    std::vector<double> flat;
    for (const auto& layer : grads) {
        flat.insert(flat.end(), layer.weight.data.begin(), layer.weight.data.end());
        flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    }
    return flat;
}

// Numeric gradient of value_of(net) with respect to the network parameters.
std::vector<double> numeric_mlp_grad(const MLPParams& net,
                                     const std::function<double(const MLPParams&)>& value_of,
                                     double eps) {
    Matrix2D flat(1, net.parameter_count());
    flat.data = flatten(net);
    MLPParams probe = net;
    const Matrix2D numeric = finite_diff_grad(
        [&](const Matrix2D& p) {
            assign_flat(probe, p.data);
            return value_of(probe);
        },
        flat, eps);
    return numeric.data;
}

class Checker {
public:
    Checker(double eps, double perturbation) : eps_(eps), perturbation_(perturbation) {}

    void record(const std::string& name, double error) {
        auto [it, inserted] = index_.try_emplace(name, reports_.size());
        if (inserted) reports_.push_back({name, error});
        else reports_[it->second].max_rel_error = std::max(reports_[it->second].max_rel_error, error);
    }

    void check_direct(const std::string& name, const Matrix2D& analytic,
                      const std::function<double(const Matrix2D&)>& f, const Matrix2D& at) {
        const Matrix2D numeric = finite_diff_grad(f, at, eps_);
        record(name, max_rel_error(analytic.data, numeric.data, perturbation_));
    }

    void check_mlp(const std::string& name, const MLPGrads& analytic, const MLPParams& net,
                   const std::function<double(const MLPParams&)>& value_of) {
        const std::vector<double> flat_analytic = flatten_grads(analytic);
        const std::vector<double> numeric = numeric_mlp_grad(net, value_of, eps_);
        record(name, max_rel_error(flat_analytic, numeric, perturbation_));
    }

    std::vector<GradCheckReport> reports() && { return std::move(reports_); }

private:
    double eps_;
    double perturbation_;
    std::vector<GradCheckReport> reports_;
    std::map<std::string, std::size_t> index_;
};

void check_instance(Checker& checker, const Instance& inst) {
    const Margins& margins = inst.margins;

    // Eq-2-style source loss: direct feature and center gradients.
    {
        const LossValue loss = source_dcl(inst.features, inst.labels, inst.centers, margins);
        checker.check_direct(
            "source_dcl/features", loss.feature_grads,
            [&](const Matrix2D& f) {
                return source_dcl(f, inst.labels, inst.centers, margins).value;
            },
            inst.features);
        checker.check_direct(
            "source_dcl/centers", loss.center_grads,
            [&](const Matrix2D& c) {
                return source_dcl(inst.features, inst.labels, c, margins).value;
            },
            inst.centers);
    }

    // Source loss through the generator.
    {
        ForwardCache cache;
        const Matrix2D feats = forward(inst.generator, inst.source_inputs, &cache);
        const LossValue loss = source_dcl(feats, inst.labels, inst.centers, margins);
        const MLPGrads analytic = backward(inst.generator, cache, loss.feature_grads);
        checker.check_mlp("source_dcl/generator", analytic, inst.generator,
                          [&](const MLPParams& g) {
                              return source_dcl(forward(g, inst.source_inputs), inst.labels,
                                                inst.centers, margins)
                                  .value;
                          });
    }

    // Weighted target loss, fixed weights and pseudo-labels.
    {
        const LossValue loss = target_dcl(inst.target_features, inst.pseudo_labels, inst.weights,
                                          inst.centers, margins);
        checker.check_direct(
            "target_dcl/features", loss.feature_grads,
            [&](const Matrix2D& f) {
                return target_dcl(f, inst.pseudo_labels, inst.weights, inst.centers, margins)
                    .value;
            },
            inst.target_features);
        checker.check_direct(
            "target_dcl/centers", loss.center_grads,
            [&](const Matrix2D& c) {
                return target_dcl(inst.target_features, inst.pseudo_labels, inst.weights, c,
                                  margins)
                    .value;
            },
            inst.centers);

        ForwardCache cache;
        const Matrix2D feats = forward(inst.generator, inst.target_inputs, &cache);
        const LossValue through = target_dcl(feats, inst.pseudo_labels, inst.weights,
                                             inst.centers, margins);
        const MLPGrads analytic = backward(inst.generator, cache, through.feature_grads);
        checker.check_mlp("target_dcl/generator", analytic, inst.generator,
                          [&](const MLPParams& g) {
                              return target_dcl(forward(g, inst.target_inputs),
                                                inst.pseudo_labels, inst.weights, inst.centers,
                                                margins)
                                  .value;
                          });
    }

    // Alignment between two learned center sets, both sides.
    {
        const LossValue loss = center_alignment(inst.centers, inst.second_centers);
        checker.check_direct(
            "center_alignment/source_centers", loss.center_grads,
            [&](const Matrix2D& c) { return center_alignment(c, inst.second_centers).value; },
            inst.centers);
        checker.check_direct(
            "center_alignment/target_centers", scale(loss.center_grads, -1.0),
            [&](const Matrix2D& c) { return center_alignment(inst.centers, c).value; },
            inst.second_centers);
    }

    // Batch-centroid alignment used by the softmax ablations.
    {
        const AlignmentTerm term =
            centroid_alignment(inst.features, inst.labels, inst.target_features,
                               inst.pseudo_labels, kClasses);
        checker.check_direct(
            "centroid_alignment/source_features", term.source_feature_grad,
            [&](const Matrix2D& f) {
                return centroid_alignment(f, inst.labels, inst.target_features,
                                          inst.pseudo_labels, kClasses)
                    .value;
            },
            inst.features);
        checker.check_direct(
            "centroid_alignment/target_features", term.target_feature_grad,
            [&](const Matrix2D& f) {
                return centroid_alignment(inst.features, inst.labels, f, inst.pseudo_labels,
                                          kClasses)
                    .value;
            },
            inst.target_features);
    }

    const Matrix2D gen_source = forward(inst.generator, inst.source_inputs);
    const Matrix2D gen_target = forward(inst.generator, inst.target_inputs);

    // Domain classification loss through the discriminator parameters.
    {
        ForwardCache source_cache, target_cache;
        const Matrix2D p_s = forward(inst.discriminator, gen_source, &source_cache);
        const Matrix2D p_t = forward(inst.discriminator, gen_target, &target_cache);
        const DiscriminatorLoss loss = discriminator_loss(p_s, p_t);
        MLPGrads analytic = backward(inst.discriminator, source_cache, loss.source_grad);
        accumulate(analytic, backward(inst.discriminator, target_cache, loss.target_grad));
        checker.check_mlp("discriminator_loss/discriminator", analytic, inst.discriminator,
                          [&](const MLPParams& d) {
                              return discriminator_loss(forward(d, gen_source),
                                                        forward(d, gen_target))
                                  .value;
                          });
    }

    // The reversed domain term as the generator sees it, discriminator fixed.
    {
        ForwardCache source_cache, target_cache;
        const Matrix2D feats_s = forward(inst.generator, inst.source_inputs, &source_cache);
        const Matrix2D feats_t = forward(inst.generator, inst.target_inputs, &target_cache);
        ForwardCache ds_cache, dt_cache;
        const Matrix2D p_s = forward(inst.discriminator, feats_s, &ds_cache);
        const Matrix2D p_t = forward(inst.discriminator, feats_t, &dt_cache);
        const DiscriminatorLoss loss = discriminator_loss(p_s, p_t);
        Matrix2D dfeat_s, dfeat_t;
        backward(inst.discriminator, ds_cache, loss.source_grad, &dfeat_s);
        backward(inst.discriminator, dt_cache, loss.target_grad, &dfeat_t);
        MLPGrads analytic =
            backward(inst.generator, source_cache, generator_domain_grad(dfeat_s));
        accumulate(analytic,
                   backward(inst.generator, target_cache, generator_domain_grad(dfeat_t)));
        checker.check_mlp("generator_domain/generator", analytic, inst.generator,
                          [&](const MLPParams& g) {
                              return -discriminator_loss(
                                          forward(inst.discriminator,
                                                  forward(g, inst.source_inputs)),
                                          forward(inst.discriminator,
                                                  forward(g, inst.target_inputs)))
                                          .value;
                          });
    }

    // Softmax cross-entropy: direct logits, then through head and generator.
    {
        const Matrix2D logits = forward(inst.head, inst.features);
        const LossValue loss = softmax_xent(logits, inst.labels);
        checker.check_direct(
            "softmax_xent/logits", loss.feature_grads,
            [&](const Matrix2D& l) { return softmax_xent(l, inst.labels).value; }, logits);

        ForwardCache gen_cache, head_cache;
        const Matrix2D feats = forward(inst.generator, inst.source_inputs, &gen_cache);
        const Matrix2D through_logits = forward(inst.head, feats, &head_cache);
        const LossValue through = softmax_xent(through_logits, inst.labels);
        Matrix2D dfeats;
        const MLPGrads head_analytic =
            backward(inst.head, head_cache, through.feature_grads, &dfeats);
        checker.check_mlp("softmax_xent/head", head_analytic, inst.head,
                          [&](const MLPParams& h) {
                              return softmax_xent(forward(h, feats), inst.labels).value;
                          });
        const MLPGrads gen_analytic = backward(inst.generator, gen_cache, dfeats);
        checker.check_mlp("softmax_xent/generator", gen_analytic, inst.generator,
                          [&](const MLPParams& g) {
                              return softmax_xent(forward(inst.head,
                                                          forward(g, inst.source_inputs)),
                                                  inst.labels)
                                  .value;
                          });
    }

    // Full generator objective, shared centers: value and every gradient route.
    {
        auto combined_value = [&](const MLPParams& g, const Matrix2D& c) {
            const Matrix2D fs = forward(g, inst.source_inputs);
            const Matrix2D ft = forward(g, inst.target_inputs);
            GeneratorLossParts parts;
            parts.source = source_dcl(fs, inst.labels, c, margins);
            parts.target = target_dcl(ft, inst.pseudo_labels, inst.weights, c, margins);
            DomainAdversary domain;
            domain.value = discriminator_loss(forward(inst.discriminator, fs),
                                              forward(inst.discriminator, ft))
                               .value;
            parts.domain = std::move(domain);
            return combined_generator_loss(parts, inst.lambda_t, 0.0, inst.lambda_d, true)
                .value;
        };

        ForwardCache source_cache, target_cache;
        const Matrix2D fs = forward(inst.generator, inst.source_inputs, &source_cache);
        const Matrix2D ft = forward(inst.generator, inst.target_inputs, &target_cache);
        GeneratorLossParts parts;
        parts.source = source_dcl(fs, inst.labels, inst.centers, margins);
        parts.target = target_dcl(ft, inst.pseudo_labels, inst.weights, inst.centers, margins);
        ForwardCache ds_cache, dt_cache;
        const Matrix2D p_s = forward(inst.discriminator, fs, &ds_cache);
        const Matrix2D p_t = forward(inst.discriminator, ft, &dt_cache);
        const DiscriminatorLoss dloss = discriminator_loss(p_s, p_t);
        DomainAdversary domain;
        domain.value = dloss.value;
        backward(inst.discriminator, ds_cache, dloss.source_grad, &domain.source_feature_grad);
        backward(inst.discriminator, dt_cache, dloss.target_grad, &domain.target_feature_grad);
        parts.domain = std::move(domain);

        const CombinedLoss combined =
            combined_generator_loss(parts, inst.lambda_t, 0.0, inst.lambda_d, true);
        MLPGrads gen_analytic =
            backward(inst.generator, source_cache, combined.source_feature_grads);
        accumulate(gen_analytic,
                   backward(inst.generator, target_cache, combined.target_feature_grads));
        checker.check_mlp("combined/generator", gen_analytic, inst.generator,
                          [&](const MLPParams& g) { return combined_value(g, inst.centers); });
        checker.check_direct(
            "combined/centers", combined.center_grads,
            [&](const Matrix2D& c) { return combined_value(inst.generator, c); }, inst.centers);
    }
}

}  // namespace

std::vector<GradCheckReport> run_gradient_checks(std::size_t instances, double eps,
                                                 double perturbation) {
    if (instances == 0) throw config_error("run_gradient_checks: need at least one instance");
    Checker checker(eps, perturbation);
    for (std::size_t i = 0; i < instances; ++i) {
        check_instance(checker, make_instance(i));
    }
    return std::move(checker).reports();
}

double worst_rel_error(const std::vector<GradCheckReport>& reports) {
    double worst = 0.0;
    for (const auto& r : reports) worst = std::max(worst, r.max_rel_error);
    return worst;
}

}  // namespace centershift

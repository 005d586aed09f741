#include "centershift/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "centershift/errors.hpp"

namespace centershift {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw config_error(message);
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001B3ull;
    }
}

void hash_double(std::uint64_t& h, double v) { hash_bytes(h, &v, sizeof v); }

void hash_u64(std::uint64_t& h, std::uint64_t v) { hash_bytes(h, &v, sizeof v); }

void hash_mlp(std::uint64_t& h, const MLPParams& params) {
    for (const auto& layer : params.layers) {
        for (double v : layer.weight.data) hash_double(h, v);
        for (double v : layer.bias) hash_double(h, v);
    }
}

}  // namespace

Mode mode_from_string(const std::string& name) {
    for (Mode mode : all_modes()) {
        if (to_string(mode) == name) return mode;
    }
    throw config_error("unknown mode '" + name + "'");
}

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::source_only: return "source_only";
        case Mode::revgrad: return "revgrad";
        case Mode::sda_ours: return "sda_ours";
        case Mode::tcl_ours: return "tcl_ours";
        case Mode::sda_tcl: return "sda_tcl";
        case Mode::tcl_origin: return "tcl_origin";
        case Mode::sda_origin: return "sda_origin";
        case Mode::linear_combination: return "linear_combination";
    }
    throw config_error("unknown mode value");
}

const std::vector<Mode>& all_modes() {
    static const std::vector<Mode> modes = {
        Mode::source_only, Mode::revgrad,    Mode::sda_ours,   Mode::tcl_ours,
        Mode::sda_tcl,     Mode::tcl_origin, Mode::sda_origin, Mode::linear_combination,
    };
    return modes;
}

ModeDescriptor mode_losses(Mode mode) {
    ModeDescriptor d;
    switch (mode) {
        case Mode::source_only:
            break;
        case Mode::revgrad:
        case Mode::sda_ours:
            d.discriminator = true;
            break;
        case Mode::tcl_ours:
            d.discriminator = true;
            d.target_loss = true;
            d.shared_centers = false;
            break;
        case Mode::sda_tcl:
            d.discriminator = true;
            d.target_loss = true;
            break;
        case Mode::tcl_origin:
            d.center_loss = false;
            d.discriminator = true;
            d.target_loss = true;
            break;
        case Mode::sda_origin:
            d.center_loss = false;
            d.discriminator = true;
            d.alignment = true;
            break;
        case Mode::linear_combination:
            d.center_loss = false;
            d.discriminator = true;
            d.target_loss = true;
            d.alignment = true;
            break;
    }
    return d;
}

void validate_config(const TrainConfig& config, const DomainDataset& source,
                     const DomainDataset& target) {
    const ModeDescriptor desc = mode_losses(config.mode);
    require(config.iterations >= 1, "config: iterations must be >= 1");
    require(config.refresh_every >= 1, "config: refresh_every must be >= 1");
    require(config.margins.alpha >= 0.0 && config.margins.alpha < config.margins.beta,
            "config: margins must satisfy 0 <= alpha < beta");
    require(config.target_weight > 0.0, "config: target_weight must be positive");
    require(config.pseudo_start < config.iterations,
            "config: pseudo_start must be below iterations");
    require(config.lr_net > 0.0 && config.lr_centers > 0.0,
            "config: learning rates must be positive");
    require(config.embedding_dim >= 1, "config: embedding_dim must be positive");
    require(config.log_every >= 1, "config: log_every must be >= 1");
    if (config.lambda_c && !desc.alignment) {
        throw config_error("config: lambda_c is only meaningful in modes with an alignment term (" +
                           to_string(config.mode) + " shares or omits centers)");
    }

    require(source.domain_tag() == Domain::source && source.has_labels(),
            "config: source dataset must be labeled and tagged source");
    require(target.domain_tag() == Domain::target, "config: target dataset must be tagged target");
    require(source.input_dim() == target.input_dim(), "config: domain input dims differ");
    require(source.class_count() >= 2, "config: need at least 2 classes");
    require(config.batch_size >= 1 && config.batch_size <= source.size() &&
                config.batch_size <= target.size(),
            "config: batch_size must fit both datasets");
}

Trainer::Trainer(TrainConfig config, const DomainDataset& source, const DomainDataset& target)
    : config_(std::move(config)),
      desc_(mode_losses(config_.mode)),
      source_(&source),
      target_(&target),
      source_sampler_(1, 1, Rng(0)),
      target_sampler_(1, 1, Rng(0)) {
    validate_config(config_, source, target);
    schedule_ = Schedule{config_.target_weight, config_.pseudo_start, config_.iterations};
    lambda_c_value_ = config_.lambda_c.value_or(desc_.alignment ? 1.0 : 0.0);

    const std::size_t class_count = source.class_count();
    Rng rng(config_.seed);

    std::vector<std::size_t> gen_dims{source.input_dim()};
    gen_dims.insert(gen_dims.end(), config_.generator_hidden.begin(),
                    config_.generator_hidden.end());
    gen_dims.push_back(config_.embedding_dim);
    generator_ = init_mlp(gen_dims, OutputActivation::identity, rng);
    generator_state_ = make_adam_state(generator_);

    if (desc_.discriminator) {
        std::vector<std::size_t> disc_dims{config_.embedding_dim};
        disc_dims.insert(disc_dims.end(), config_.discriminator_hidden.begin(),
                         config_.discriminator_hidden.end());
        disc_dims.push_back(1);
        discriminator_ = init_mlp(disc_dims, OutputActivation::sigmoid, rng);
        discriminator_state_ = make_adam_state(*discriminator_);
    }

    if (desc_.center_loss) {
        CenterSet cs = init_centers(class_count, config_.embedding_dim, rng);
        if (!desc_.shared_centers) cs = unshare(cs);
        centers_ = std::move(cs);
        center_state_ = make_adam_state(centers_->centers);
        if (!desc_.shared_centers) {
            target_center_state_ = make_adam_state(centers_->target_centers);
        }
    } else {
        head_ = init_mlp({config_.embedding_dim, class_count}, OutputActivation::identity, rng);
        head_state_ = make_adam_state(*head_);
    }

    pseudo_ = random_pseudo_state(target.size(), class_count, rng);
    source_sampler_ = BatchSampler(source.size(), config_.batch_size, rng.fork());
    target_sampler_ = BatchSampler(target.size(), config_.batch_size, rng.fork());
    eval_seed_ = rng.next_u64();
    started_ = std::chrono::steady_clock::now();
}

Trainer::StepBatches Trainer::draw_batches() {
    StepBatches batches;
    batches.source = draw_batch(*source_, source_sampler_);
    batches.target = draw_batch(*target_, target_sampler_);
    return batches;
}

void Trainer::maybe_refresh() {
    if (!should_refresh(iteration_, config_.refresh_every)) return;
    if (centers_) {
        pseudo_ = refresh(generator_, *centers_, *target_, iteration_);
    } else {
        pseudo_ = refresh_with_head(generator_, *head_, *target_, iteration_);
    }
    RefreshPoint point;
    point.iteration = iteration_;
    if (target_->has_labels()) {
        point.pseudo_accuracy = pseudo_accuracy(pseudo_, target_->evaluation_labels());
    }
    metrics_.refresh_points.push_back(point);
}

void Trainer::discriminator_phase(const StepBatches& batches) {
    if (!desc_.discriminator) {
        last_loss_domain_ = 0.0;
        return;
    }
    const Matrix2D source_feats = forward(generator_, batches.source.features);
    const Matrix2D target_feats = forward(generator_, batches.target.features);
    ForwardCache source_cache, target_cache;
    const Matrix2D p_source = forward(*discriminator_, source_feats, &source_cache);
    const Matrix2D p_target = forward(*discriminator_, target_feats, &target_cache);
    const DiscriminatorLoss loss = discriminator_loss(p_source, p_target);
    last_loss_domain_ = loss.value;

    MLPGrads grads = backward(*discriminator_, source_cache, loss.source_grad);
    accumulate(grads, backward(*discriminator_, target_cache, loss.target_grad));
    adam_step(*discriminator_, grads, discriminator_state_, config_.lr_net);
}

void Trainer::generator_phase(const StepBatches& batches) {
    const LambdaPair lambdas = lambda_schedule(iteration_, schedule_);
    last_lambdas_ = lambdas;
    // The alignment term consumes pseudo-labels, so it obeys the same gate.
    const double lambda_c = (iteration_ >= config_.pseudo_start) ? lambda_c_value_ : 0.0;

    const bool need_target_stream = desc_.target_loss || desc_.alignment || desc_.discriminator;
    ForwardCache source_cache, target_cache;
    const Matrix2D source_feats = forward(generator_, batches.source.features, &source_cache);
    Matrix2D target_feats;
    if (need_target_stream) {
        target_feats = forward(generator_, batches.target.features, &target_cache);
    }

    std::vector<std::size_t> batch_pseudo;
    std::vector<double> batch_weights;
    if (desc_.target_loss || desc_.alignment) {
        batch_pseudo.reserve(batches.target.indices.size());
        batch_weights.reserve(batches.target.indices.size());
        for (std::size_t i : batches.target.indices) {
            batch_pseudo.push_back(pseudo_.labels[i]);
            batch_weights.push_back(pseudo_.weights[i]);
        }
    }

    GeneratorLossParts parts;
    MLPGrads head_grads;
    ForwardCache head_source_cache, head_target_cache;

    if (desc_.center_loss) {
        parts.source = source_dcl(source_feats, batches.source.labels, centers_->source_view(),
                                  config_.margins);
        if (desc_.target_loss) {
            parts.target = target_dcl(target_feats, batch_pseudo, batch_weights,
                                      centers_->target_view(), config_.margins);
        }
    } else {
        const Matrix2D logits = forward(*head_, source_feats, &head_source_cache);
        LossValue ce = softmax_xent(logits, batches.source.labels);
        LossValue source_part;
        source_part.value = ce.value;
        head_grads = backward(*head_, head_source_cache, ce.feature_grads,
                              &source_part.feature_grads);
        parts.source = std::move(source_part);

        if (desc_.target_loss) {
            const Matrix2D target_logits = forward(*head_, target_feats, &head_target_cache);
            LossValue ce_t = softmax_xent(target_logits, batch_pseudo);
            LossValue target_part;
            target_part.value = ce_t.value;
            MLPGrads head_target_grads = backward(*head_, head_target_cache, ce_t.feature_grads,
                                                  &target_part.feature_grads);
            accumulate(head_grads, head_target_grads, lambdas.lambda_t);
            parts.target = std::move(target_part);
        }
    }

    if (desc_.alignment) {
        parts.alignment = centroid_alignment(source_feats, batches.source.labels, target_feats,
                                             batch_pseudo, source_->class_count());
    }

    if (desc_.discriminator) {
        ForwardCache disc_source_cache, disc_target_cache;
        const Matrix2D p_source = forward(*discriminator_, source_feats, &disc_source_cache);
        const Matrix2D p_target = forward(*discriminator_, target_feats, &disc_target_cache);
        const DiscriminatorLoss loss = discriminator_loss(p_source, p_target);
        DomainAdversary domain;
        domain.value = loss.value;
        backward(*discriminator_, disc_source_cache, loss.source_grad,
                 &domain.source_feature_grad);
        backward(*discriminator_, disc_target_cache, loss.target_grad,
                 &domain.target_feature_grad);
        parts.domain = std::move(domain);
    }

    const CombinedLoss combined = combined_generator_loss(parts, lambdas.lambda_t, lambda_c,
                                                          lambdas.lambda_d, desc_.shared_centers);

    MLPGrads generator_grads;
    if (!combined.source_feature_grads.empty()) {
        generator_grads = backward(generator_, source_cache, combined.source_feature_grads);
    } else {
        generator_grads = zero_grads_like(generator_);
    }
    if (!combined.target_feature_grads.empty()) {
        accumulate(generator_grads, backward(generator_, target_cache,
                                             combined.target_feature_grads));
    }
    adam_step(generator_, generator_grads, generator_state_, config_.lr_net);

    if (centers_) {
        if (!combined.center_grads.empty()) {
            adam_step(centers_->centers, combined.center_grads, center_state_,
                      config_.lr_centers);
        }
        if (!desc_.shared_centers && !combined.target_center_grads.empty()) {
            adam_step(centers_->target_centers, combined.target_center_grads,
                      target_center_state_, config_.lr_centers);
        }
    }
    if (head_) {
        adam_step(*head_, head_grads, head_state_, config_.lr_net);
    }

    last_loss_source_ = parts.source->value;
    last_loss_target_ = parts.target ? parts.target->value : 0.0;
    last_loss_align_ = parts.alignment ? parts.alignment->value : 0.0;
    last_loss_generator_ = combined.value;
}

void Trainer::step() {
    maybe_refresh();
    const StepBatches batches = draw_batches();
    discriminator_phase(batches);
    generator_phase(batches);
    if (iteration_ % config_.log_every == 0) log_row();
    ++iteration_;
}

void Trainer::run() {
    while (iteration_ < config_.iterations) step();
    finalize_metrics();
}

void Trainer::finalize_metrics() {
    const Matrix2D source_embed = forward(generator_, source_->features());
    const Matrix2D target_embed = forward(generator_, target_->features());
    Rng eval_rng(eval_seed_);
    metrics_.a_distance = proxy_a_distance(source_embed, target_embed, eval_rng);
    if (target_->has_labels()) {
        metrics_.final_accuracy =
            accuracy(predict_current(target_->features()), target_->evaluation_labels());
    }
    metrics_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
}

std::vector<std::size_t> Trainer::predict_current(const Matrix2D& inputs) const {
    if (centers_) return predict(generator_, *centers_, inputs);
    return predict_with_head(generator_, *head_, inputs);
}

void Trainer::log_row() {
    MetricsRow row;
    row.iteration = iteration_;
    row.loss_source = last_loss_source_;
    row.loss_target = last_loss_target_;
    row.loss_domain = last_loss_domain_;
    row.loss_generator = last_loss_generator_;
    row.lambda_d = last_lambdas_.lambda_d;
    row.lambda_t = last_lambdas_.lambda_t;
    if (desc_.alignment) {
        row.loss_align = last_loss_align_;
    } else if (centers_) {
        // The alignment objective evaluated over the center views; identically
        // zero whenever the two views are the same shared set.
        row.loss_align =
            center_alignment(centers_->source_view(), centers_->target_view()).value;
    }
    if (target_->has_labels()) {
        const auto& truth = target_->evaluation_labels();
        row.target_accuracy = accuracy(predict_current(target_->features()), truth);
        row.pseudo_accuracy = pseudo_accuracy(pseudo_, truth);
    }
    metrics_.rows.push_back(row);
}

TrainResult Trainer::finish() {
    TrainResult result;
    result.config = config_;
    result.generator = generator_;
    result.discriminator = discriminator_;
    result.centers = centers_;
    result.head = head_;
    result.pseudo = pseudo_;
    result.metrics = metrics_;
    return result;
}

TrainResult train(const TrainConfig& config, const DomainDataset& source,
                  const DomainDataset& target) {
    Trainer trainer(config, source, target);
    trainer.run();
    return trainer.finish();
}

std::vector<std::size_t> predict(const MLPParams& generator, const CenterSet& centers,
                                 const Matrix2D& inputs) {
    const Matrix2D feats = forward(generator, inputs);
    std::vector<std::size_t> labels(feats.rows);
    for (std::size_t i = 0; i < feats.rows; ++i) {
        labels[i] = nearest_center(feats.row(i), centers).index;
    }
    return labels;
}

std::vector<std::size_t> predict_with_head(const MLPParams& generator, const MLPParams& head,
                                           const Matrix2D& inputs) {
    const Matrix2D logits = forward(head, forward(generator, inputs));
    std::vector<std::size_t> labels(logits.rows);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const auto row = logits.row(i);
        labels[i] =
            static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return labels;
}

std::vector<std::size_t> predict_target(const TrainResult& result, const Matrix2D& inputs) {
    if (result.centers) return predict(result.generator, *result.centers, inputs);
    if (result.head) return predict_with_head(result.generator, *result.head, inputs);
    throw config_error("predict_target: result has neither centers nor a head");
}

std::uint64_t trajectory_hash(const TrainResult& result) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const MetricsRow& row : result.metrics.rows) {
        hash_u64(h, row.iteration);
        hash_double(h, row.loss_source);
        hash_double(h, row.loss_target);
        hash_double(h, row.loss_domain);
        hash_double(h, row.loss_align);
        hash_double(h, row.loss_generator);
        hash_double(h, row.lambda_d);
        hash_double(h, row.lambda_t);
    }
    hash_mlp(h, result.generator);
    if (result.discriminator) hash_mlp(h, *result.discriminator);
    if (result.head) hash_mlp(h, *result.head);
    if (result.centers) {
        for (double v : result.centers->centers.data) hash_double(h, v);
        for (double v : result.centers->target_centers.data) hash_double(h, v);
    }
    for (std::size_t label : result.pseudo.labels) hash_u64(h, label);
    for (double w : result.pseudo.weights) hash_double(h, w);
    return h;
}

}  // namespace centershift

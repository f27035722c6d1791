#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "coevo/adam.hpp"
#include "coevo/data.hpp"
#include "coevo/errors.hpp"
#include "coevo/fitness.hpp"
#include "coevo/metrics.hpp"
#include "coevo/nn.hpp"

namespace coevo {

enum class Role { host, pathogen };

/// Discriminator architecture family. "light" halves the hidden width,
/// "prelu" swaps the hidden nonlinearities for trainable PReLU slopes.
enum class ArchName { base, light, prelu };

inline const char* arch_name(ArchName a) {
    switch (a) {
        case ArchName::base: return "base";
        case ArchName::light: return "light";
        case ArchName::prelu: return "prelu";
    }
    return "?";
}

struct ArchVariant {
    ArchName name = ArchName::base;
    std::size_t hidden_width = 64;
    Activation hidden_activation = Activation::leaky_relu;
};

inline ArchVariant arch_variant(ArchName name, std::size_t base_width = 64) {
    switch (name) {
        case ArchName::light:
            return {ArchName::light, base_width / 2, Activation::leaky_relu};
        case ArchName::prelu:
            return {ArchName::prelu, base_width, Activation::prelu};
        case ArchName::base:
        default:
            return {ArchName::base, base_width, Activation::leaky_relu};
    }
}

inline constexpr std::size_t kDataDim = 2;
inline constexpr std::size_t kDefaultLatentDim = 16;
inline constexpr std::size_t kHiddenLayers = 3;
inline constexpr std::size_t kGeneratorWidth = 64;

/// One learner: a host (discriminator) or pathogen (generator) with its genome,
/// optimizer state, fitness and infection registry.
struct Individual {
    int id = -1;
    Role role = Role::pathogen;
    ArchVariant variant;      // meaningful for hosts; pathogens share one architecture
    NetworkParams net;
    AdamState optimizer;
    double fitness = 0.0;
    InfectionState infections; // hosts only; stays empty for pathogens
    double last_err_real = 0.0;
    std::uint64_t epochs_trained = 0;
};

/// Result of one training epoch between a host and a pathogen.
struct MatchRecord {
    int host_id = -1;
    int pathogen_id = -1;
    std::uint64_t epoch_index = 0;
    double err_real = 0.0;
    double err_gen = 0.0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    // Set only by fitness-driven structures; plain round-robins leave them empty.
    std::optional<double> host_fitness_after;
    std::optional<double> pathogen_fitness_after;
};

struct TrainingConfig {
    std::size_t batch_size = 64;
    std::size_t batches_per_epoch = 128;
    std::size_t latent_dim = kDefaultLatentDim;
    AdamConfig discriminator_opt{2e-4, 0.5, 0.999, 1e-8};
    AdamConfig generator_opt{2e-4, 0.5, 0.999, 1e-8};
    bool skip_discriminator = false;
    bool skip_generator = false; // evaluation-only epochs (measurement harness)

    void validate() const {
        require(batch_size >= 1 && batches_per_epoch >= 1,
                "training: batch_size and batches_per_epoch must be >= 1");
        require(latent_dim >= 1, "training: latent_dim must be >= 1");
        discriminator_opt.validate();
        generator_opt.validate();
    }
};

/// Pathogen: latent (dim cfg.latent_dim) -> 2-D data through 3 hidden layers of
/// width 64 (leaky relu) and an identity output (the data space is unbounded).
inline Individual build_generator(int id, std::uint64_t seed, const TrainingConfig& cfg = {}) {
    std::vector<LayerSpec> spec;
    spec.emplace_back(cfg.latent_dim, kGeneratorWidth, Activation::leaky_relu);
    for (std::size_t i = 1; i < kHiddenLayers; ++i)
        spec.emplace_back(kGeneratorWidth, kGeneratorWidth, Activation::leaky_relu);
    spec.emplace_back(kGeneratorWidth, kDataDim, Activation::identity);

    Individual ind;
    ind.id = id;
    ind.role = Role::pathogen;
    ind.net = init_network(spec, seed);
    ind.optimizer = AdamState::for_network(ind.net, cfg.generator_opt);
    return ind;
}

/// Host: 2-D data -> sigmoid score in (0,1) through 3 hidden layers whose width
/// and activation come from the architecture variant.
inline Individual build_discriminator(int id, const ArchVariant& variant, std::uint64_t seed,
                                      const TrainingConfig& cfg = {}) {
    require(variant.hidden_width >= 1, "build_discriminator: hidden width must be >= 1");
    std::vector<LayerSpec> spec;
    spec.emplace_back(kDataDim, variant.hidden_width, variant.hidden_activation);
    for (std::size_t i = 1; i < kHiddenLayers; ++i)
        spec.emplace_back(variant.hidden_width, variant.hidden_width, variant.hidden_activation);
    spec.emplace_back(variant.hidden_width, 1, Activation::sigmoid);

    Individual ind;
    ind.id = id;
    ind.role = Role::host;
    ind.variant = variant;
    ind.net = init_network(spec, seed);
    ind.optimizer = AdamState::for_network(ind.net, cfg.discriminator_opt);
    ind.infections.host_id = id;
    ind.fitness = 1.0;
    return ind;
}

namespace detail {

inline Matrix draw_latents(std::size_t n, std::size_t dim, SeededStream& stream) {
    Matrix z(n, dim);
    for (double& v : z.data) v = stream.next_normal();
    return z;
}

// Binary cross-entropy over a column of sigmoid scores against a constant
// label, plus its gradient wrt the scores. Scores are clamped away from 0/1
// so the gradient stays finite at saturation.
inline constexpr double kBceClamp = 1e-12;

inline double bce_loss(const Matrix& scores, double label, std::size_t count_from,
                       std::size_t count_to) {
    double loss = 0.0;
    for (std::size_t i = count_from; i < count_to; ++i) {
        const double y = std::clamp(scores(i, 0), kBceClamp, 1.0 - kBceClamp);
        loss -= label * std::log(y) + (1.0 - label) * std::log(1.0 - y);
    }
    return loss;
}

inline void bce_grad_rows(Matrix& grad, const Matrix& scores, double label, std::size_t from,
                          std::size_t to, double inv_n) {
    for (std::size_t i = from; i < to; ++i) {
        const double y = std::clamp(scores(i, 0), kBceClamp, 1.0 - kBceClamp);
        grad(i, 0) = (-label / y + (1.0 - label) / (1.0 - y)) * inv_n;
    }
}

} // namespace detail

/// One adversarial training epoch for a (host, pathogen) pair.
///
/// Per minibatch: the discriminator trains on BCE over real samples (label 1)
/// stacked with generated samples (label 0); the generator then trains on the
/// non-saturating flipped-label loss through the updated discriminator.
/// err_real and err_gen are measured on the discriminator-update forward pass
/// (both on the same pre-update parameters) and averaged over the epoch.
/// Real samples come only from `data_stream`, latents only from
/// `latent_stream`; exactly batches_per_epoch * batch_size of each.
inline MatchRecord train_epoch(Individual& host, Individual& pathogen, const MixtureSpec& mixture,
                               const TrainingConfig& cfg, SeededStream& data_stream,
                               SeededStream& latent_stream, std::uint64_t epoch_index = 0) {
    cfg.validate();
    require(host.role == Role::host && pathogen.role == Role::pathogen,
            "train_epoch: roles are swapped");
    require(pathogen.net.input_width() == cfg.latent_dim,
            "train_epoch: latent_dim does not match the generator");

    const std::size_t B = cfg.batch_size;
    const double inv_d_n = 1.0 / static_cast<double>(2 * B);
    const double inv_g_n = 1.0 / static_cast<double>(B);

    std::size_t real_misses = 0;  // real samples scored below 0.5
    std::size_t gen_passes = 0;   // generated samples scored at or above 0.5
    double d_loss_sum = 0.0;
    double g_loss_sum = 0.0;

    for (std::size_t b = 0; b < cfg.batches_per_epoch; ++b) {
        const Matrix x_real = sample(mixture, B, data_stream);
        const Matrix z = detail::draw_latents(B, cfg.latent_dim, latent_stream);

        ForwardCache g_cache;
        const Matrix x_gen = forward(pathogen.net, z, &g_cache);

        // Discriminator pass on [real; generated].
        ForwardCache d_cache;
        const Matrix stacked = vstack(x_real, x_gen);
        const Matrix scores = forward(host.net, stacked, &d_cache);

        for (std::size_t i = 0; i < B; ++i)
            if (scores(i, 0) < 0.5) ++real_misses;
        for (std::size_t i = B; i < 2 * B; ++i)
            if (scores(i, 0) >= 0.5) ++gen_passes;

        const double d_loss =
            (detail::bce_loss(scores, 1.0, 0, B) + detail::bce_loss(scores, 0.0, B, 2 * B)) * inv_d_n;
        d_loss_sum += d_loss;
        if (!std::isfinite(d_loss))
            throw numeric_error("train_epoch: non-finite discriminator loss at minibatch " +
                                std::to_string(b) + " (host " + std::to_string(host.id) +
                                ", pathogen " + std::to_string(pathogen.id) + ")");

        if (!cfg.skip_discriminator) {
            Matrix d_grad(2 * B, 1);
            detail::bce_grad_rows(d_grad, scores, 1.0, 0, B, inv_d_n);
            detail::bce_grad_rows(d_grad, scores, 0.0, B, 2 * B, inv_d_n);
            const Gradients grads = backward(host.net, d_cache, d_grad);
            adam_step(host.net, grads, host.optimizer);
        }

        // Generator pass: flipped labels through the (possibly updated)
        // discriminator. Reuses this minibatch's latents; the generator sees
        // real data only through the discriminator's response.
        ForwardCache d_cache2;
        const Matrix scores_gen = forward(host.net, x_gen, &d_cache2);
        const double g_loss = detail::bce_loss(scores_gen, 1.0, 0, B) * inv_g_n;
        g_loss_sum += g_loss;
        if (!std::isfinite(g_loss))
            throw numeric_error("train_epoch: non-finite generator loss at minibatch " +
                                std::to_string(b) + " (host " + std::to_string(host.id) +
                                ", pathogen " + std::to_string(pathogen.id) + ")");

        if (!cfg.skip_generator) {
            Matrix g_out_grad(B, 1);
            detail::bce_grad_rows(g_out_grad, scores_gen, 1.0, 0, B, inv_g_n);
            Matrix dx_gen;
            backward(host.net, d_cache2, g_out_grad, &dx_gen); // discriminator not updated here
            const Gradients g_grads = backward(pathogen.net, g_cache, dx_gen);
            adam_step(pathogen.net, g_grads, pathogen.optimizer);
        }
    }

    const double n_seen = static_cast<double>(cfg.batches_per_epoch * B);
    MatchRecord rec;
    rec.host_id = host.id;
    rec.pathogen_id = pathogen.id;
    rec.epoch_index = epoch_index;
    rec.err_real = static_cast<double>(real_misses) / n_seen;
    rec.err_gen = static_cast<double>(gen_passes) / n_seen;
    rec.d_loss = d_loss_sum / static_cast<double>(cfg.batches_per_epoch);
    rec.g_loss = g_loss_sum / static_cast<double>(cfg.batches_per_epoch);
    host.epochs_trained += 1;
    pathogen.epochs_trained += 1;
    return rec;
}

/// Evaluation-only pass: same err_real / err_gen definitions as train_epoch,
/// no parameter updates. Deterministic given the stream positions.
inline std::pair<double, double> measure_errors(const Individual& host, const Individual& pathogen,
                                                const MixtureSpec& mixture, std::size_t n_eval,
                                                SeededStream& data_stream,
                                                SeededStream& latent_stream) {
    require(n_eval >= 1, "measure_errors: n_eval must be >= 1");
    require(host.role == Role::host && pathogen.role == Role::pathogen,
            "measure_errors: roles are swapped");

    std::size_t real_misses = 0;
    std::size_t gen_passes = 0;
    constexpr std::size_t chunk = 512;
    for (std::size_t done = 0; done < n_eval; done += chunk) {
        const std::size_t n = std::min(chunk, n_eval - done);
        const Matrix x_real = sample(mixture, n, data_stream);
        const Matrix scores_real = forward(host.net, x_real);
        for (std::size_t i = 0; i < n; ++i)
            if (scores_real(i, 0) < 0.5) ++real_misses;
    }
    for (std::size_t done = 0; done < n_eval; done += chunk) {
        const std::size_t n = std::min(chunk, n_eval - done);
        const Matrix z = detail::draw_latents(n, pathogen.net.input_width(), latent_stream);
        const Matrix scores_gen = forward(host.net, forward(pathogen.net, z));
        for (std::size_t i = 0; i < n; ++i)
            if (scores_gen(i, 0) >= 0.5) ++gen_passes;
    }
    const double n_d = static_cast<double>(n_eval);
    return {static_cast<double>(real_misses) / n_d, static_cast<double>(gen_passes) / n_d};
}

/// Frechet distance between Gaussian fits of n_eval real samples and n_eval
/// generated samples (fresh latents). Deterministic given the seed; scoring
/// never advances training streams.
inline double score_generator(const Individual& pathogen, const MixtureSpec& mixture,
                              std::size_t n_eval, std::uint64_t seed) {
    require(n_eval >= 128, "score_generator: n_eval must be >= 128");
    require(pathogen.role == Role::pathogen, "score_generator: not a pathogen");

    SeededStream real_stream(derive_seed(seed, 1));
    SeededStream latent_stream(derive_seed(seed, 2));
    const Matrix x_real = sample(mixture, n_eval, real_stream);
    const Matrix z = detail::draw_latents(n_eval, pathogen.net.input_width(), latent_stream);
    const Matrix x_gen = forward(pathogen.net, z);
    return frechet_distance(fit_moments(x_real), fit_moments(x_gen));
}

} // namespace coevo

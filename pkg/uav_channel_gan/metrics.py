"""Divergences, adversarial value function and utility for the learning protocol."""

from typing import Sequence

import numpy as np
from scipy.special import rel_entr

from uav_channel_gan.model import Discriminator, GenerativeModel


def symmetric_kl(p: np.ndarray, q: np.ndarray, floor: float = 1e-9) -> float:
    """
    KL(p || q) + KL(q || p) after flooring both and renormalizing.

    Args:
        p: Probability vector
        q: Probability vector over the same bins
        floor: Mass added to every bin before the logs

    Returns:
        Symmetrized KL divergence in nats
    """
    p = np.asarray(p, dtype=float) + floor
    q = np.asarray(q, dtype=float) + floor
    p, q = p / p.sum(), q / q.sum()
    return float(rel_entr(p, q).sum() + rel_entr(q, p).sum())


def model_divergence(
    model: GenerativeModel, reference: GenerativeModel, floor: float = 1e-9
) -> float:
    """Symmetrized KL between two models on their joint union support."""
    model._check(reference)
    union = np.union1d(model.keys, reference.keys)
    return symmetric_kl(model.probability(union), reference.probability(union), floor)


def jsd_metric(
    models: Sequence[GenerativeModel], global_model: GenerativeModel, floor: float = 1e-9
) -> float:
    """
    Network accuracy metric (1 / 2I) sum_i [KL(G_i || F) + KL(F || G_i)].

    The symmetrized KL is used as is (no mixture midpoint), evaluated on the joint
    (condition, cell) table.
    """
    if not models:
        return 0.0
    total = sum(model_divergence(m, global_model, floor) for m in models)
    return total / (2 * len(models))


def value_function(
    discriminator: Discriminator,
    generator: GenerativeModel,
    mixture: GenerativeModel,
    floor: float = 1e-9,
) -> float:
    """
    Adversarial value averaged over conditions occupied by both the mixture and the generator:
    E_{s ~ f_b}[ln D(s|k)] + E_{s ~ f_G}[ln(1 - D(s|k))].

    D is clipped to [floor, 1 - floor] before the logs.
    """
    both = np.intersect1d(mixture.occupied_conditions(), generator.occupied_conditions())
    if len(both) == 0:
        return float("nan")
    real_cond, _ = mixture.split_keys()
    fake_cond, _ = generator.split_keys()
    log_d = np.log(np.clip(discriminator(mixture.keys), floor, 1 - floor))
    log_not_d = np.log(1 - np.clip(discriminator(generator.keys), floor, 1 - floor))
    real_p = mixture.conditional_probability(mixture.keys)
    fake_p = generator.conditional_probability(generator.keys)

    values = []
    for k in both:
        real = real_cond == k
        fake = fake_cond == k
        values.append(np.sum(real_p[real] * log_d[real]) + np.sum(fake_p[fake] * log_not_d[fake]))
    return float(np.mean(values))


def minibatch_value(
    discriminator: Discriminator,
    generator: GenerativeModel,
    mixture: GenerativeModel,
    batch_size: int,
    rng: np.random.Generator,
    floor: float = 1e-9,
) -> float:
    """Monte-Carlo estimate of the value from u real and u generated samples."""
    if mixture.is_empty or generator.is_empty:
        return float("nan")
    real = rng.choice(mixture.keys, size=batch_size, p=mixture.weights)
    fake = rng.choice(generator.keys, size=batch_size, p=generator.weights)
    d_real = np.clip(discriminator(real), floor, 1 - floor)
    d_fake = np.clip(discriminator(fake), floor, 1 - floor)
    return float(np.mean(np.log(d_real)) + np.mean(np.log(1 - d_fake)))


def total_utility(values: Sequence[float]) -> float:
    """Network utility: sum of the per-UAV values."""
    return float(np.sum(values))


def support_fraction(model: GenerativeModel, reference: GenerativeModel) -> float:
    """Share of the reference support that the model covers."""
    if reference.is_empty:
        return 1.0
    return float(np.isin(reference.keys, model.keys).mean())

"""Generator/discriminator pair that hunts for student-rejected samples.

The discriminator plays the usual real-vs-fake game. The generator fights it
and carries a second penalty: a frozen copy of the student scores each fake,
and fakes that fail to look like pure rejections are taxed. Minimizing both
pushes generated samples toward regions that look like data to D but that no
known-class head claims, which is exactly what the student wants to train its
rejection head on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import (
    PROB_FLOOR,
    AdamConfig,
    Model,
    adam_step,
    backward,
    binary_cross_entropy,
    forward,
    input_dim,
    output_dim,
    safe_log,
)
from .student import StudentModel, rejection_row, student_forward, student_input_grad


@dataclass(frozen=True)
class LatentPrior:
    """Standard normal prior over the generator's latent space."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("latent dim must be at least 1")


def sample_latent(prior: LatentPrior, n: int, rng) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    gen = np.random.default_rng(rng)
    return gen.standard_normal((n, prior.dim))


@dataclass
class ExplorerPair:
    """Generator, discriminator, and the weight on the student-rejection term.

    non_saturating switches the generator's adversarial term from
    log(1 - D(G(z))) to -log D(G(z)); default is the saturating form.
    """

    generator: Model
    discriminator: Model
    lam: float = 1.0
    non_saturating: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")
        g_out = output_dim(self.generator.spec)
        d_in = input_dim(self.discriminator.spec)
        if g_out != d_in:
            raise ValueError(
                f"generator output {g_out} does not match discriminator input {d_in}"
            )
        if output_dim(self.discriminator.spec) != 1:
            raise ValueError("discriminator must emit a single probability")
        if self.discriminator.spec[-1].kind != "sigmoid":
            raise ValueError("discriminator stack must end in sigmoid")

    @property
    def latent_dim(self) -> int:
        return input_dim(self.generator.spec)

    @property
    def data_dim(self) -> int:
        return output_dim(self.generator.spec)


def generate(pair: ExplorerPair, latent_batch: np.ndarray) -> np.ndarray:
    return forward(pair.generator, latent_batch).output


def discriminator_objective(
    pair: ExplorerPair, real_batch: np.ndarray, latent_batch: np.ndarray
) -> float:
    """mean log D(x) + mean log(1 - D(G(z))), the quantity D ascends."""
    p_real = forward(pair.discriminator, real_batch).output
    fakes = generate(pair, latent_batch)
    p_fake = forward(pair.discriminator, fakes).output
    return float(np.mean(safe_log(p_real)) + np.mean(safe_log(1.0 - p_fake)))


def discriminator_step(
    pair: ExplorerPair,
    real_batch: np.ndarray,
    latent_batch: np.ndarray,
    adam: AdamConfig,
) -> float:
    """Ascend the discriminator objective (by descending its negation).

    Returns the descent-form loss at the pre-step parameters:
    -(mean log D(x) + mean log(1 - D(G(z)))).
    """
    real_batch = np.asarray(real_batch, dtype=np.float64)
    if len(real_batch) == 0 or len(latent_batch) == 0:
        raise ValueError("discriminator step needs non-empty real and latent batches")
    fakes = generate(pair, latent_batch)

    tr_real = forward(pair.discriminator, real_batch)
    p_real = tr_real.output
    tr_fake = forward(pair.discriminator, fakes)
    p_fake = tr_fake.output

    loss = float(-np.mean(safe_log(p_real)) - np.mean(safe_log(1.0 - p_fake)))
    # d(-mean log p_r)/dp_r and d(-mean log(1-p_f))/dp_f; the floor is identity
    d_real = -1.0 / (len(real_batch) * np.maximum(p_real, PROB_FLOOR))
    d_fake = 1.0 / (len(fakes) * np.maximum(1.0 - p_fake, PROB_FLOOR))
    g_real, _ = backward(tr_real, d_real)
    g_fake, _ = backward(tr_fake, d_fake)
    grads = {k: g_real[k] + g_fake[k] for k in g_real}
    adam_step(pair.discriminator, grads, adam)
    return loss


def generator_step(
    pair: ExplorerPair,
    student: StudentModel | None,
    latent_batch: np.ndarray,
    adam: AdamConfig,
) -> tuple[float, float]:
    """Descend the generator objective: adversarial term plus lam times the
    student-rejection cross entropy. D and S are frozen; only G moves.

    Returns (adv_loss, student_loss) at the pre-step parameters; student_loss
    is the unweighted cross entropy. With lam=0 the student is never
    evaluated and the second value is 0.0.
    """
    latent_batch = np.asarray(latent_batch, dtype=np.float64)
    if len(latent_batch) == 0:
        raise ValueError("generator step needs a non-empty latent batch")
    n = len(latent_batch)
    g_trace = forward(pair.generator, latent_batch)
    fakes = g_trace.output

    d_trace = forward(pair.discriminator, fakes)
    p_d = d_trace.output
    if pair.non_saturating:
        adv_loss = float(-np.mean(safe_log(p_d)))
        d_out = -1.0 / (n * np.maximum(p_d, PROB_FLOOR))
    else:
        adv_loss = float(np.mean(safe_log(1.0 - p_d)))
        d_out = -1.0 / (n * np.maximum(1.0 - p_d, PROB_FLOOR))
    _, dx = backward(d_trace, d_out)  # discriminator grads discarded

    student_loss = 0.0
    if pair.lam > 0.0:
        if student is None:
            raise ValueError("lam > 0 requires a student to score fakes")
        s_trace = student_forward(student, fakes)
        y_u = rejection_row(student.n_heads)
        targets = np.broadcast_to(y_u, s_trace.probs.shape)
        student_loss = binary_cross_entropy(s_trace.probs, targets)
        dlogits = pair.lam * (s_trace.probs - y_u) / n
        dx = dx + student_input_grad(student, s_trace, dlogits)

    grads, _ = backward(g_trace, dx)
    adam_step(pair.generator, grads, adam)
    return adv_loss, student_loss

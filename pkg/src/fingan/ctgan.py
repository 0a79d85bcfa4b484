"""Conditional tabular GAN with per-column Gaussian-mixture normalization.

Continuous columns are represented as (alpha, mode one-hot) pairs where alpha
is the offset from the sampled mixture component's mean in units of 4 sigma.
Discrete columns are one-hot. Training conditions the generator on a
(column, category) one-hot drawn by log-frequency sampling, and real batches
are drawn from rows matching the sampled condition so rare categories stay
represented. The adversarial loop itself follows the WGAN critic recipe.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import nn_core
from .data_model import Table
from .errors import (
    EmptyConditionBucketWarning,
    EmptyMinority,
    InvalidOneHot,
    NoDiscreteColumns,
    NonFiniteLoss,
)
from .gan import generator_backward_step, generator_forward
from .nn_core import (
    AdamConfig,
    Layer,
    NetworkSpec,
    adam_step,
    backward,
    clip_weights,
    forward,
    init_network,
)

MAX_MODES = 10
WEIGHT_PRUNE = 0.005
ALPHA_SCALE = 4.0
EM_MAX_ITERS = 200
EM_TOL = 1e-8


@dataclass
class ModeNormalizer:
    weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    loglik_history: list = field(default_factory=list)

    @property
    def n_modes(self):
        return len(self.weights)

    def to_dict(self):
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["weights"]), np.array(d["means"]), np.array(d["stds"]))


def _sigma_floor(values):
    rng_width = float(np.max(values) - np.min(values))
    return 1e-6 * rng_width if rng_width > 0 else 1e-6


def _kmeanspp_centers(values, k, rng):
    centers = [values[rng.integers(len(values))]]
    for _ in range(1, k):
        d2 = np.min((values[:, None] - np.array(centers)[None, :]) ** 2, axis=1)
        total = d2.sum()
        if total == 0:
            centers.append(values[rng.integers(len(values))])
            continue
        centers.append(values[rng.choice(len(values), p=d2 / total)])
    return np.array(centers)


def fit_mode_normalizer(values, max_modes=MAX_MODES, seed=0):
    """Gaussian mixture for one continuous column.

    EM is run from a k-means++ initialization for every component count up
    to max_modes; the count is selected by BIC, then components below the
    weight-prune threshold are dropped and the weights renormalized. This
    keeps redundant components from surviving on well-separated clusters.
    """
    values = np.asarray(values, dtype=float)
    floor = _sigma_floor(values)
    distinct = np.unique(values)
    if len(distinct) < 2:
        return ModeNormalizer(np.array([1.0]), np.array([float(values[0])]),
                              np.array([floor]))

    best = None
    for k in range(1, min(max_modes, len(distinct)) + 1):
        fit = _fit_em(values, k, floor, seed)
        n_params = 3 * k - 1
        bic = -2.0 * fit[3][-1] + n_params * np.log(len(values))
        if best is None or bic < best[0] - 1e-9:
            best = (bic, fit)
    weights, means, stds, loglik_history = best[1]

    keep = weights >= WEIGHT_PRUNE
    if not keep.any():
        keep = weights == weights.max()
    weights, means, stds = weights[keep], means[keep], stds[keep]
    weights = weights / weights.sum()
    order = np.argsort(means)
    return ModeNormalizer(weights[order], means[order], stds[order], loglik_history)


def _fit_em(values, k, floor, seed):
    rng = np.random.default_rng(seed)
    means = _kmeanspp_centers(values, k, rng)
    stds = np.full(k, max(values.std(), floor))
    weights = np.full(k, 1.0 / k)

    loglik_history = []
    prev = -np.inf
    for _ in range(EM_MAX_ITERS):
        # E step
        log_pdf = (
            -0.5 * ((values[:, None] - means[None, :]) / stds[None, :]) ** 2
            - np.log(stds[None, :])
            - 0.5 * np.log(2 * np.pi)
        )
        log_w = np.log(np.maximum(weights, 1e-300))
        joint = log_pdf + log_w[None, :]
        row_max = joint.max(axis=1, keepdims=True)
        lse = row_max[:, 0] + np.log(np.exp(joint - row_max).sum(axis=1))
        loglik = float(lse.sum())
        loglik_history.append(loglik)
        resp = np.exp(joint - lse[:, None])
        # M step
        nk = resp.sum(axis=0)
        safe = np.maximum(nk, 1e-12)
        weights = nk / len(values)
        means = (resp * values[:, None]).sum(axis=0) / safe
        var = (resp * (values[:, None] - means[None, :]) ** 2).sum(axis=0) / safe
        stds = np.maximum(np.sqrt(var), floor)
        if loglik - prev < EM_TOL and np.isfinite(prev):
            break
        prev = loglik
    return weights, means, stds, loglik_history


def _mode_posteriors(values, norm):
    values = np.atleast_1d(np.asarray(values, dtype=float))
    pdf = np.exp(-0.5 * ((values[:, None] - norm.means[None, :]) / norm.stds[None, :]) ** 2)
    pdf /= norm.stds[None, :]
    post = norm.weights[None, :] * pdf
    total = post.sum(axis=1, keepdims=True)
    uniform = np.full_like(post, 1.0 / norm.n_modes)
    return np.where(total > 0, post / np.maximum(total, 1e-300), uniform)


def encode_continuous(value, norm, seed=0):
    """Sample a mode for the value; return (alpha, one-hot over modes)."""
    alphas, onehots = encode_continuous_batch(np.array([value]), norm,
                                              np.random.default_rng(seed))
    return float(alphas[0]), onehots[0]


def encode_continuous_batch(values, norm, rng):
    post = _mode_posteriors(values, norm)
    cum = np.cumsum(post, axis=1)
    draws = rng.random((len(values), 1))
    modes = (draws > cum).sum(axis=1)
    modes = np.minimum(modes, norm.n_modes - 1)
    alphas = (values - norm.means[modes]) / (ALPHA_SCALE * norm.stds[modes])
    alphas = np.clip(alphas, -1.0, 1.0)
    onehots = np.zeros((len(values), norm.n_modes))
    onehots[np.arange(len(values)), modes] = 1.0
    return alphas, onehots


def decode_continuous(alpha, mode_onehot, norm):
    onehot = np.asarray(mode_onehot, dtype=float)
    hot = np.flatnonzero(onehot == 1.0)
    if len(hot) != 1 or not np.all((onehot == 0.0) | (onehot == 1.0)):
        raise InvalidOneHot(f"expected exactly one hot bit, got {onehot}")
    k = hot[0]
    return float(alpha * ALPHA_SCALE * norm.stds[k] + norm.means[k])


@dataclass(frozen=True)
class CondVector:
    column: int  # schema column index
    category: int
    onehot: np.ndarray  # flattened over all discrete columns' categories


@dataclass
class DiscreteStats:
    """Per discrete column: schema index, level count, observed frequencies."""

    columns: list  # schema column indices
    frequencies: list  # one count array per column
    offsets: list  # start of each column's block in the flattened cond vector

    @property
    def total_width(self):
        return sum(len(f) for f in self.frequencies)


def build_discrete_stats(table):
    cols = table.schema.categorical_indices
    freqs, offsets = [], []
    offset = 0
    for j in cols:
        levels = len(table.schema.columns[j].categories)
        counts = np.bincount(table.X[:, j].astype(int), minlength=levels)
        freqs.append(counts.astype(float))
        offsets.append(offset)
        offset += levels
    return DiscreteStats(list(cols), freqs, offsets)


def sample_condvec(stats, seed=None, rng=None):
    """Uniform column choice, log(1 + frequency) category choice."""
    if not stats.columns:
        raise NoDiscreteColumns("dataset has no discrete columns to condition on")
    if rng is None:
        rng = np.random.default_rng(seed)
    ci = rng.integers(len(stats.columns))
    logf = np.log1p(stats.frequencies[ci])
    total = logf.sum()
    probs = logf / total if total > 0 else np.full(len(logf), 1.0 / len(logf))
    cat = rng.choice(len(probs), p=probs)
    onehot = np.zeros(stats.total_width)
    onehot[stats.offsets[ci] + cat] = 1.0
    return CondVector(stats.columns[ci], int(cat), onehot)


@dataclass
class CtganConfig:
    epochs: int = 300
    batch_size: int = 64
    latent_dim: int = 64
    max_modes: int = MAX_MODES
    adam: AdamConfig = field(default_factory=lambda: AdamConfig(learning_rate=2e-4))
    wgan_clip: float = 0.01
    critic_steps: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.max_modes < 1:
            raise ValueError("max_modes must be >= 1")


@dataclass(frozen=True)
class CtganBlock:
    kind: str  # "alpha", "mode", or "categorical"
    column: int  # schema column index
    offset: int
    width: int


def _build_ctgan_layout(schema, normalizers):
    blocks = []
    offset = 0
    for j in schema.numeric_indices:
        blocks.append(CtganBlock("alpha", j, offset, 1))
        offset += 1
        m = normalizers[j].n_modes
        blocks.append(CtganBlock("mode", j, offset, m))
        offset += m
    for j in schema.categorical_indices:
        width = len(schema.columns[j].categories)
        blocks.append(CtganBlock("categorical", j, offset, width))
        offset += width
    return tuple(blocks), offset


def _encode_table(table, normalizers, blocks, width, rng):
    n = table.n_rows
    out = np.zeros((n, width))
    for block in blocks:
        if block.kind == "categorical":
            idx = table.X[:, block.column].astype(int)
            out[np.arange(n), block.offset + idx] = 1.0
    # alpha and its mode one-hot come from the same draw
    for j in table.schema.numeric_indices:
        alpha_block = next(b for b in blocks if b.kind == "alpha" and b.column == j)
        mode_block = next(b for b in blocks if b.kind == "mode" and b.column == j)
        alphas, onehots = encode_continuous_batch(table.X[:, j], normalizers[j], rng)
        out[:, alpha_block.offset] = alphas
        out[:, mode_block.offset:mode_block.offset + mode_block.width] = onehots
    return out


class _LayoutView:
    """Adapter so the shared generator forward/backward can walk blocks."""

    def __init__(self, blocks):
        self.blocks = blocks


def _build_ctgan_generator(latent_dim, cond_dim, blocks, seed):
    from .gan import GENERATOR_TRUNK_WIDTHS

    trunk_spec = NetworkSpec(
        latent_dim + cond_dim,
        tuple(Layer(w, nn_core.RELU) for w in GENERATOR_TRUNK_WIDTHS),
    )
    trunk = init_network(trunk_spec, seed)
    hidden = GENERATOR_TRUNK_WIDTHS[-1]
    heads = []
    for i, block in enumerate(blocks):
        if block.kind == "alpha":
            act = nn_core.TANH
        else:
            act = nn_core.SOFTMAX
        heads.append(init_network(NetworkSpec(hidden, (Layer(block.width, act),)),
                                  seed + 1000 + i))
    return trunk, heads


@dataclass
class CtganModel:
    schema: object
    normalizers: dict  # numeric schema column index -> ModeNormalizer
    blocks: tuple
    enc_width: int
    trunk: object
    heads: list
    latent_dim: int
    stats: DiscreteStats
    history: dict = field(default_factory=dict)
    mode: str = "ctgan"

    def sample(self, n, seed, condition=None):
        return sample_ctgan(self, n, seed, condition)

    def to_dict(self):
        return {
            "format": "fingan-ctgan-v1",
            "schema": self.schema.to_dict(),
            "normalizers": {str(j): nrm.to_dict() for j, nrm in self.normalizers.items()},
            "blocks": [
                {"kind": b.kind, "column": b.column, "offset": b.offset, "width": b.width}
                for b in self.blocks
            ],
            "enc_width": self.enc_width,
            "latent_dim": self.latent_dim,
            "trunk": nn_core.state_to_dict(self.trunk),
            "heads": [nn_core.state_to_dict(h) for h in self.heads],
            "stats": {
                "columns": self.stats.columns,
                "frequencies": [f.tolist() for f in self.stats.frequencies],
                "offsets": self.stats.offsets,
            },
        }

    @classmethod
    def from_dict(cls, d):
        from .data_model import Schema

        if d.get("format") != "fingan-ctgan-v1":
            raise ValueError(f"unknown model format {d.get('format')!r}")
        stats = DiscreteStats(
            list(d["stats"]["columns"]),
            [np.array(f) for f in d["stats"]["frequencies"]],
            list(d["stats"]["offsets"]),
        )
        return cls(
            Schema.from_dict(d["schema"]),
            {int(j): ModeNormalizer.from_dict(nd) for j, nd in d["normalizers"].items()},
            tuple(CtganBlock(b["kind"], b["column"], b["offset"], b["width"])
                  for b in d["blocks"]),
            d["enc_width"],
            nn_core.state_from_dict(d["trunk"]),
            [nn_core.state_from_dict(h) for h in d["heads"]],
            d["latent_dim"],
            stats,
        )


def _sample_cond_batch(stats, b, rng):
    """Batched condition draw; returns (columns, categories, onehot matrix)."""
    cols = rng.integers(len(stats.columns), size=b)
    cats = np.empty(b, dtype=int)
    onehot = np.zeros((b, stats.total_width))
    for i, ci in enumerate(cols):
        logf = np.log1p(stats.frequencies[ci])
        total = logf.sum()
        probs = logf / total if total > 0 else np.full(len(logf), 1.0 / len(logf))
        cats[i] = rng.choice(len(probs), p=probs)
        onehot[i, stats.offsets[ci] + cats[i]] = 1.0
    return cols, cats, onehot


def train_ctgan(minority, config):
    """Conditional WGAN training on minority rows; returns a sampler model."""
    if minority.n_rows == 0:
        raise EmptyMinority("no minority rows to train on")
    if not np.all(minority.y == 1):
        raise ValueError("train_ctgan expects minority (positive) rows only")

    rng = np.random.default_rng(config.seed)
    schema = minority.schema
    normalizers = {
        j: fit_mode_normalizer(minority.X[:, j], config.max_modes, config.seed + j)
        for j in schema.numeric_indices
    }
    blocks, enc_width = _build_ctgan_layout(schema, normalizers)
    real = _encode_table(minority, normalizers, blocks, enc_width, rng)

    stats = build_discrete_stats(minority)
    cond_dim = stats.total_width if stats.columns else 0
    conditioned = cond_dim > 0

    # rows grouped by (column, category) for training-by-sampling
    buckets = {}
    if conditioned:
        for ci, j in enumerate(stats.columns):
            col = minority.X[:, j].astype(int)
            for cat in range(len(stats.frequencies[ci])):
                buckets[(ci, cat)] = np.flatnonzero(col == cat)

    layout_view = _LayoutView(blocks)
    trunk, heads = _build_ctgan_generator(config.latent_dim, cond_dim, blocks,
                                          config.seed)
    from .gan import build_discriminator

    critic = build_discriminator(enc_width + cond_dim, "wgan", config.seed + 1)

    # block lookup by schema column for the condition penalty
    cond_block = {}
    for ci, j in enumerate(stats.columns):
        cond_block[ci] = next(b for b in blocks
                              if b.kind == "categorical" and b.column == j)

    steps_per_epoch = max(1, minority.n_rows // config.batch_size)
    c_hist, g_hist = [], []
    for epoch in range(config.epochs):
        c_losses, g_losses = [], []
        for _ in range(steps_per_epoch):
            b = config.batch_size
            # critic updates
            c_loss = 0.0
            for _ in range(config.critic_steps):
                if conditioned:
                    cols, cats, cond = _sample_cond_batch(stats, b, rng)
                    ridx = np.array([
                        rng.choice(buckets[(ci, cat)])
                        if len(buckets[(ci, cat)]) else rng.integers(len(real))
                        for ci, cat in zip(cols, cats)
                    ])
                else:
                    cond = np.zeros((b, 0))
                    ridx = rng.integers(0, len(real), size=b)
                real_batch = real[ridx]
                z = rng.standard_normal((b, config.latent_dim))
                gen_in = np.concatenate([z, cond], axis=1)
                _, _, fake = generator_forward(trunk, heads, layout_view, gen_in)
                acts_r = forward(critic, np.concatenate([real_batch, cond], axis=1))
                acts_f = forward(critic, np.concatenate([fake, cond], axis=1))
                c_loss = float(acts_f[-1].mean() - acts_r[-1].mean())
                gw_r, gb_r, _ = backward(critic, acts_r, np.full((b, 1), -1.0 / b))
                gw_f, gb_f, _ = backward(critic, acts_f, np.full((b, 1), 1.0 / b))
                gw = [x + y for x, y in zip(gw_r, gw_f)]
                gb = [x + y for x, y in zip(gb_r, gb_f)]
                adam_step(critic, gw, gb, config.adam)
                clip_weights(critic, config.wgan_clip)

            # generator update
            if conditioned:
                cols, cats, cond = _sample_cond_batch(stats, b, rng)
            else:
                cond = np.zeros((b, 0))
            z = rng.standard_normal((b, config.latent_dim))
            gen_in = np.concatenate([z, cond], axis=1)
            trunk_acts, head_acts, fake = generator_forward(trunk, heads,
                                                            layout_view, gen_in)
            acts_d = forward(critic, np.concatenate([fake, cond], axis=1))
            g_loss = float(-acts_d[-1].mean())
            _, _, grad_in = backward(critic, acts_d, np.full((b, 1), -1.0 / b))
            grad_fake = grad_in[:, :enc_width]

            if conditioned:
                # cross-entropy pushing the conditioned column toward its category
                ce = 0.0
                for i in range(b):
                    blk = cond_block[cols[i]]
                    p = max(fake[i, blk.offset + cats[i]], nn_core.PROB_EPS)
                    ce -= np.log(p)
                    grad_fake[i, blk.offset + cats[i]] += -1.0 / (p * b)
                g_loss += ce / b

            generator_backward_step(trunk, heads, layout_view, trunk_acts,
                                    head_acts, grad_fake, config.adam)
            if not (np.isfinite(c_loss) and np.isfinite(g_loss)):
                raise NonFiniteLoss(epoch, f"c={c_loss} g={g_loss}")
            c_losses.append(c_loss)
            g_losses.append(g_loss)
        c_hist.append(float(np.mean(c_losses)))
        g_hist.append(float(np.mean(g_losses)))
        nn_core.assert_finite(critic)
        nn_core.assert_finite(trunk)

    return CtganModel(schema, normalizers, blocks, enc_width, trunk, heads,
                      config.latent_dim, stats,
                      history={"c_loss": c_hist, "g_loss": g_hist})


def _decode_ctgan(model, encoded, condition=None):
    n = encoded.shape[0]
    X = np.zeros((n, len(model.schema.columns)))
    for block in model.blocks:
        if block.kind == "alpha":
            continue
        sl = slice(block.offset, block.offset + block.width)
        if block.kind == "mode":
            norm = model.normalizers[block.column]
            modes = np.argmax(encoded[:, sl], axis=1)
            alpha_block = next(b for b in model.blocks
                               if b.kind == "alpha" and b.column == block.column)
            alphas = np.clip(encoded[:, alpha_block.offset], -1.0, 1.0)
            X[:, block.column] = alphas * ALPHA_SCALE * norm.stds[modes] + norm.means[modes]
        else:
            X[:, block.column] = np.argmax(encoded[:, sl], axis=1)
    if condition is not None:
        col, cat = condition
        X[:, col] = cat
    return Table(model.schema, X, np.ones(n, dtype=int))


def _resolve_condition(model, condition):
    """(column name or index, category level or index) -> (col idx, cat idx)."""
    col, cat = condition
    if isinstance(col, str):
        col = model.schema.names.index(col)
    spec = model.schema.columns[col]
    if isinstance(cat, str):
        cat = spec.categories.index(cat)
    ci = model.stats.columns.index(col)
    if model.stats.frequencies[ci][cat] == 0:
        warnings.warn(
            f"condition ({spec.name!r}, category {cat}) matches no training rows; "
            "sampling without real-bucket support",
            EmptyConditionBucketWarning,
        )
    return col, cat, ci


def sample_ctgan(model, n, seed, condition=None):
    """Draw n positive rows; condition fixes one discrete column's category."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    cond_dim = model.stats.total_width if model.stats.columns else 0
    if condition is not None:
        if not model.stats.columns:
            raise NoDiscreteColumns("cannot condition: no discrete columns")
        col, cat, ci = _resolve_condition(model, condition)
        cond = np.zeros((n, cond_dim))
        cond[:, model.stats.offsets[ci] + cat] = 1.0
        enforced = (col, cat)
    elif cond_dim > 0:
        _, _, cond = _sample_cond_batch(model.stats, n, rng)
        enforced = None
    else:
        cond = np.zeros((n, 0))
        enforced = None
    z = rng.standard_normal((n, model.latent_dim))
    _, _, encoded = generator_forward(model.trunk, model.heads,
                                      _LayoutView(model.blocks),
                                      np.concatenate([z, cond], axis=1))
    return _decode_ctgan(model, encoded, enforced)

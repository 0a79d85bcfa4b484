"""One-class SVM in the nu formulation; support vectors give the undersample.

Solves min 1/2 a'Ka subject to 0 <= a_i <= 1/(nu n), sum a_i = 1 by pairwise
most-violating coordinate transfers. The solver never inverts K, so the
indefinite sigmoid kernel is tolerated; a stall flag guards non-convergence.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data_model import concat_tables
from .errors import SchemaMismatch, SolverStallWarning
from .gan import encode_for_gan, make_layout

SIGMOID = "sigmoid"
RBF = "rbf"
LINEAR = "linear"

SV_TOL = 1e-8
GAP_TOL = 1e-6
MAX_SWEEPS = 100_000


@dataclass(frozen=True)
class KernelSpec:
    kind: str = SIGMOID
    gamma: float = 1.0
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in (SIGMOID, RBF, LINEAR):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


def kernel_matrix(spec, A, B=None):
    B = A if B is None else B
    if spec.kind == LINEAR:
        return A @ B.T
    if spec.kind == SIGMOID:
        return np.tanh(spec.gamma * (A @ B.T) + spec.coef0)
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2 * A @ B.T
    return np.exp(-spec.gamma * np.maximum(sq, 0.0))


@dataclass
class OcsvmModel:
    alpha: np.ndarray
    rho: float
    kernel: KernelSpec
    nu: float
    X: np.ndarray  # training rows in encoded space
    support_indices: np.ndarray
    stalled: bool = False
    objective_history: list = field(default_factory=list)

    def to_dict(self):
        return {
            "format": "fingan-ocsvm-v1",
            "alpha": self.alpha.tolist(),
            "rho": self.rho,
            "kernel": {"kind": self.kernel.kind, "gamma": self.kernel.gamma,
                       "coef0": self.kernel.coef0},
            "nu": self.nu,
            "support_indices": self.support_indices.tolist(),
        }


def fit_ocsvm(X, nu, kernel, seed=0):
    """Fit on encoded rows (one row per majority sample)."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if not 0 < nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    if n < 2:
        raise ValueError("need at least 2 rows")

    C = 1.0 / (nu * n)
    K = kernel_matrix(kernel, X)
    alpha = np.full(n, 1.0 / n)  # feasible: 1/n <= C
    g = K @ alpha  # gradient of 1/2 a'Ka
    obj = 0.5 * float(alpha @ g)
    history = [obj]

    stalled = False
    sweeps = 0
    while True:
        sweeps += 1
        can_up = alpha < C - 1e-15
        can_down = alpha > 1e-15
        if not can_up.any() or not can_down.any():
            break
        gi_masked = np.where(can_up, g, np.inf)
        gj_masked = np.where(can_down, g, -np.inf)
        i = int(np.argmin(gi_masked))
        j = int(np.argmax(gj_masked))
        gap = g[j] - g[i]
        if gap < GAP_TOL:
            break
        if sweeps > MAX_SWEEPS:
            stalled = True
            warnings.warn(
                f"pairwise solver hit {MAX_SWEEPS} sweeps with gap {gap:.3g}",
                SolverStallWarning,
            )
            break
        lam_max = min(C - alpha[i], alpha[j])
        d = K[i, i] + K[j, j] - 2 * K[i, j]
        if d > 1e-15:
            lam = min(gap / d, lam_max)
        else:
            # flat or concave direction: endpoint with lower objective
            delta_at_max = -lam_max * gap + 0.5 * lam_max**2 * d
            lam = lam_max if delta_at_max < 0 else 0.0
        if lam <= 0:
            break
        alpha[i] += lam
        alpha[j] -= lam
        g += lam * (K[:, i] - K[:, j])
        obj += -lam * gap + 0.5 * lam * lam * d
        history.append(obj)

    support = np.flatnonzero(alpha > SV_TOL)
    margin = np.flatnonzero((alpha > SV_TOL) & (alpha < C - SV_TOL))
    if len(margin):
        rho = float(g[margin].mean())
    else:
        # fall back to the midpoint of the optimality interval
        lo = g[alpha > 1e-15].max() if (alpha > 1e-15).any() else g.max()
        hi = g[alpha < C - 1e-15].min() if (alpha < C - 1e-15).any() else g.min()
        rho = float((lo + hi) / 2)
    return OcsvmModel(alpha, rho, kernel, nu, X.copy(), support, stalled, history)


def decision_function(model, rows):
    """Score rows; >= 0 means inside the learned region."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != model.X.shape[1]:
        raise SchemaMismatch(
            f"row width {rows.shape[1]} != training width {model.X.shape[1]}")
    sv = model.support_indices
    Ksv = kernel_matrix(model.kernel, model.X[sv], rows)
    return model.alpha[sv] @ Ksv - model.rho


def default_gamma(dim):
    return 1.0 / dim


def encode_for_kernel(table, params, layout=None):
    """Standardized numerics + one-hot categoricals, as kernel inputs."""
    from .data_model import apply_preprocess

    std = apply_preprocess(table, params, "forward")
    # one-hot categoricals; numerics kept at their standardized values
    if layout is None:
        layout = make_layout(std)
    n = std.n_rows
    out = np.zeros((n, layout.width))
    for block in layout.blocks:
        if block.kind == "categorical":
            idx = std.X[:, block.column].astype(int)
            out[np.arange(n), block.offset + idx] = 1.0
        else:
            for k, j in enumerate(layout.numeric_columns):
                out[:, block.offset + k] = std.X[:, j]
    return out, layout


def undersample_majority(train, nu, kernel=None, seed=0, params=None):
    """Keep only the majority rows that are support vectors.

    Returns (majority subset Table, fitted OcsvmModel). Minority rows are
    untouched; merging is the pipeline's job.
    """
    from .data_model import fit_preprocess

    majority = train.negatives()
    if majority.n_rows == 0 or train.n_positive == 0:
        raise ValueError("train must contain both classes")
    if params is None:
        params = fit_preprocess(majority)
    X, _ = encode_for_kernel(majority, params)
    if kernel is None:
        kernel = KernelSpec(SIGMOID, default_gamma(X.shape[1]), 0.0)
    model = fit_ocsvm(X, nu, kernel, seed)
    kept = majority.subset(model.support_indices)
    return kept, model

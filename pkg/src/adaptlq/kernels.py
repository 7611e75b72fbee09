"""Per-component kernels h_l for the supported testing problems.

Component indices exposed through `component_set` and `eval_kernel` are
1-based, matching the usual mathematical notation.  The array builders at the
bottom of the module (used by the fast engines) work with 0-based indices.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from . import _engines
from .exceptions import KernelError


class Problem(enum.Enum):
    MEAN = "mean"
    SPATIAL_SIGN = "spatial-sign"
    COVARIANCE = "covariance"
    KENDALL = "kendall"
    SPEARMAN = "spearman"
    LINREG = "linreg"
    TWO_SAMPLE_SPATIAL_SIGN = "two-sample-spatial-sign"
    TWO_SAMPLE_MEAN = "two-sample-mean"

    @classmethod
    def from_name(cls, name: str) -> "Problem":
        try:
            return cls(name)
        except ValueError:
            names = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown problem {name!r}; expected one of {names}") from None


class Arity(enum.Enum):
    ONE_SAMPLE = "one-sample"
    TWO_SAMPLE = "two-sample"


# problem -> (order r, degeneracy s)
_ORDER = {
    Problem.MEAN: (1, 1),
    Problem.SPATIAL_SIGN: (1, 1),
    Problem.COVARIANCE: (1, 1),
    Problem.KENDALL: (2, 1),
    Problem.SPEARMAN: (3, 1),
    Problem.LINREG: (2, 1),
    Problem.TWO_SAMPLE_SPATIAL_SIGN: (1, 1),
    Problem.TWO_SAMPLE_MEAN: (1, 1),
}

_PAIR_INDEXED = {Problem.COVARIANCE, Problem.KENDALL, Problem.SPEARMAN}
_TWO_SAMPLE = {Problem.TWO_SAMPLE_SPATIAL_SIGN, Problem.TWO_SAMPLE_MEAN}


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A testing problem together with its null parameter.

    null_param is mu0 (mean), Sigma0 (covariance) or beta0 (linreg); None means
    zero.  `band` selects the banded covariance index set {p2 >= p1 + band}.
    """

    problem: Problem
    null_param: np.ndarray | None = None
    band: int | None = None

    def __post_init__(self):
        if isinstance(self.problem, str):
            object.__setattr__(self, "problem", Problem.from_name(self.problem))
        if self.null_param is not None:
            if self.problem not in (Problem.MEAN, Problem.COVARIANCE, Problem.LINREG):
                raise KernelError(f"{self.problem.value} takes no null parameter")
            arr = np.array(self.null_param, dtype=np.float64, copy=True)
            if self.problem is Problem.COVARIANCE:
                if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                    raise KernelError("Sigma0 must be a square matrix")
                if not np.allclose(arr, arr.T, rtol=0, atol=1e-12):
                    raise KernelError("Sigma0 must be symmetric")
            elif arr.ndim != 1:
                arr = arr.reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, "null_param", arr)
        if self.band is not None:
            if self.problem is not Problem.COVARIANCE:
                raise KernelError("band only applies to the covariance problem")
            if int(self.band) < 1:
                raise KernelError("band offset must be >= 1")
            object.__setattr__(self, "band", int(self.band))

    @property
    def order_r(self) -> int:
        return _ORDER[self.problem][0]

    @property
    def degeneracy_s(self) -> int:
        return _ORDER[self.problem][1]

    @property
    def sample_arity(self) -> Arity:
        return Arity.TWO_SAMPLE if self.problem in _TWO_SAMPLE else Arity.ONE_SAMPLE

    @property
    def pair_indexed(self) -> bool:
        return self.problem in _PAIR_INDEXED

    def check_dimension(self, p: int) -> None:
        if p < 1:
            raise KernelError("p must be >= 1")
        if self.problem in (Problem.KENDALL, Problem.SPEARMAN) and p < 2:
            raise KernelError(f"{self.problem.value} needs p >= 2 (got {p})")
        if self.band is not None and self.band >= p:
            raise KernelError(f"band {self.band} leaves no components for p={p}")
        if self.null_param is not None:
            want = (p, p) if self.problem is Problem.COVARIANCE else (p,)
            if self.null_param.shape != want:
                raise KernelError(
                    f"null parameter has shape {self.null_param.shape}, expected {want}")

    def null_vector(self, p: int) -> np.ndarray:
        if self.null_param is not None:
            return self.null_param
        shape = (p, p) if self.problem is Problem.COVARIANCE else (p,)
        return np.zeros(shape)


def component_set(spec: KernelSpec, p: int) -> list:
    """Sorted enumeration of the component index set (1-based)."""
    spec.check_dimension(p)
    if spec.problem is Problem.COVARIANCE:
        if spec.band is not None:
            return [(a, b) for a in range(1, p + 1) for b in range(a + spec.band, p + 1)]
        return [(a, b) for a in range(1, p + 1) for b in range(a, p + 1)]
    if spec.problem in (Problem.KENDALL, Problem.SPEARMAN):
        return [(a, b) for a in range(1, p + 1) for b in range(a + 1, p + 1)]
    return list(range(1, p + 1))


def component_array(spec: KernelSpec, p: int) -> np.ndarray:
    """0-based component indices: shape (L,) or (L, 2) for pair-indexed problems."""
    comps = component_set(spec, p)
    return np.asarray(comps, dtype=np.int64) - 1


def _sgn(x: float) -> float:
    x = float(x)
    return float((x > 0) - (x < 0))


def _spatial(v: np.ndarray) -> np.ndarray:
    norm = float(np.sqrt(np.dot(v, v)))
    if norm == 0.0:
        raise KernelError("spatial-sign kernel undefined at a zero-norm vector")
    return v / norm


def eval_kernel(spec: KernelSpec, l, args) -> float:
    """Evaluate h_l at one tuple of observations.

    For linreg each argument is an (x, y) pair; for two-sample problems `args`
    is (x, y) with x from the first sample and y from the second.
    """
    args = tuple(args)
    if len(args) != max(spec.order_r, 2 if spec.sample_arity is Arity.TWO_SAMPLE else 1):
        raise KernelError(
            f"{spec.problem.value} takes {spec.order_r} argument(s), got {len(args)}")
    prob = spec.problem
    if prob is Problem.LINREG:
        (x1, y1), (x2, y2) = args
        x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
        beta0 = spec.null_vector(x1.shape[0])
        dx = x1 - x2
        return float(dx[l - 1] * (float(y1) - float(y2) - float(dx @ beta0)) / 2.0)

    rows = [np.asarray(a, dtype=np.float64).reshape(-1) for a in args]
    p = rows[0].shape[0]
    if prob is Problem.MEAN:
        return float(rows[0][l - 1] - spec.null_vector(p)[l - 1])
    if prob is Problem.SPATIAL_SIGN:
        return float(_spatial(rows[0])[l - 1])
    if prob is Problem.COVARIANCE:
        a, b = l
        return float(rows[0][a - 1] * rows[0][b - 1] - spec.null_vector(p)[a - 1, b - 1])
    if prob is Problem.KENDALL:
        a, b = l
        xi, xj = rows
        return _sgn(xi[a - 1] - xj[a - 1]) * _sgn(xi[b - 1] - xj[b - 1])
    if prob is Problem.SPEARMAN:
        a, b = l
        # anchor u is compared with v on column a and with w on column b
        total = 0.0
        for u, v, w in permutations(range(3)):
            total += _sgn(rows[u][a - 1] - rows[v][a - 1]) * _sgn(rows[u][b - 1] - rows[w][b - 1])
        return total / 6.0
    if prob is Problem.TWO_SAMPLE_SPATIAL_SIGN:
        return float(_spatial(rows[0] - rows[1])[l - 1])
    if prob is Problem.TWO_SAMPLE_MEAN:
        return float(rows[0][l - 1] - rows[1][l - 1])
    raise KernelError(f"unhandled problem {prob}")


# ---------------------------------------------------------------------------
# array builders for the fast engines


def order1_matrix(spec: KernelSpec, X: np.ndarray) -> np.ndarray:
    """Matrix A with A[i, l] = h_l(X_i) for an order-one one-sample kernel."""
    X = np.asarray(X, dtype=np.float64)
    p = X.shape[1]
    comps = component_array(spec, p)
    prob = spec.problem
    if prob is Problem.MEAN:
        return X - spec.null_vector(p)[None, :]
    if prob is Problem.SPATIAL_SIGN:
        norms = np.sqrt(np.einsum("ij,ij->i", X, X))
        if np.any(norms == 0.0):
            bad = int(np.flatnonzero(norms == 0.0)[0])
            raise KernelError(f"spatial-sign kernel undefined: row {bad + 1} has zero norm")
        return X / norms[:, None]
    if prob is Problem.COVARIANCE:
        a, b = comps[:, 0], comps[:, 1]
        return X[:, a] * X[:, b] - spec.null_vector(p)[a, b][None, :]
    raise KernelError(f"{prob.value} is not an order-one one-sample kernel")


def sign_tensor(X: np.ndarray) -> np.ndarray:
    """S[k, u, v] = sgn(X[u, k] - X[v, k]) as float64, shape (p, n, n)."""
    return _engines.sign_tensor(np.asarray(X, dtype=np.float64))


def residuals(spec: KernelSpec, covariates: np.ndarray, response: np.ndarray) -> np.ndarray:
    """e_i = y_i - x_i' beta0."""
    beta0 = spec.null_vector(covariates.shape[1])
    return np.asarray(response, dtype=np.float64) - covariates @ beta0


def two_sample_tensor(spec: KernelSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """K[l, i, j] = h_l(X_i, Y_j) for an order-(1,1) two-sample kernel."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    diff = X[:, None, :] - Y[None, :, :]
    if spec.problem is Problem.TWO_SAMPLE_SPATIAL_SIGN:
        norms = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        if np.any(norms == 0.0):
            i, j = np.argwhere(norms == 0.0)[0]
            raise KernelError(
                f"two-sample spatial-sign kernel undefined: X_{i + 1} equals Y_{j + 1}")
        diff = diff / norms[:, :, None]
    elif spec.problem is not Problem.TWO_SAMPLE_MEAN:
        raise KernelError(f"{spec.problem.value} is not a two-sample kernel")
    return np.ascontiguousarray(np.moveaxis(diff, 2, 0))

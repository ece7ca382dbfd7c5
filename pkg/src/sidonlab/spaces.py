"""Finite probability spaces and scalar/matricial function systems."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_PRODUCT_CAP = 1 << 20


class IncompatibleSystems(ValueError):
    """Raised when two systems do not live on the same space or sizes differ."""


class ProductTooLarge(ValueError):
    """Raised when a product grid would exceed the materialization cap."""


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProbabilitySpace:
    """M weighted atoms. Duplicate atoms are allowed; only weights matter."""

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights, np.float64).ravel()
        if w.size < 1:
            raise ValueError("a probability space needs at least one point")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, M):
        return cls(np.full(M, 1.0 / M))

    @property
    def size(self):
        return self.weights.size

    def same_as(self, other):
        return self is other or (self.size == other.size and np.array_equal(self.weights, other.weights))

    def product(self, other):
        return ProbabilitySpace(np.outer(self.weights, other.weights).ravel())

    def to_dict(self):
        return {"weights": [repr(float(x)) for x in self.weights]}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array([float(x) for x in d["weights"]]))

    def __eq__(self, other):
        return isinstance(other, ProbabilitySpace) and self.same_as(other)


@dataclass(frozen=True, eq=False)
class FunctionSystem:
    """N complex functions sampled on a finite space: ``values[n, i] = phi_n(t_i)``."""

    space: ProbabilitySpace
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = _frozen(self.values, np.complex128)
        if v.ndim == 1:
            v = _frozen(v[None, :], np.complex128)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("values must be an N x M matrix with N >= 1")
        if v.shape[1] != self.space.size:
            raise ValueError(f"values have {v.shape[1]} columns, space has {self.space.size} points")
        if not np.all(np.isfinite(v)):
            raise ValueError("system values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def N(self):
        return self.values.shape[0]

    @property
    def M(self):
        return self.values.shape[1]

    @property
    def is_real(self):
        return not np.any(self.values.imag)

    def row(self, n):
        return self.values[n]

    def sup_norms(self):
        return np.abs(self.values).max(axis=1)

    def l1_norms(self):
        return np.abs(self.values) @ self.space.weights

    def means(self):
        return self.values @ self.space.weights

    def combination(self, y):
        """Values of ``sum_n y_n phi_n`` on the grid."""
        return np.asarray(y, dtype=complex) @ self.values

    def scaled(self, factors):
        f = np.broadcast_to(np.asarray(factors, dtype=complex), (self.N,))
        return FunctionSystem(self.space, self.values * f[:, None], self.label)

    def subsystem(self, rows):
        return FunctionSystem(self.space, self.values[list(rows)], self.label)

    def gram(self):
        return biorthogonality_gram(self, self).gram

    def to_dict(self):
        return {
            "space": self.space.to_dict(),
            "N": self.N,
            "values": [[[float(z.real), float(z.imag)] for z in row] for row in self.values],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d):
        space = ProbabilitySpace.from_dict(d["space"])
        arr = np.array(d["values"], dtype=np.float64)
        vals = arr[..., 0] + 1j * arr[..., 1]
        if vals.shape[0] != d["N"]:
            raise ValueError("N does not match the number of rows")
        return cls(space, vals, d.get("label", ""))


@dataclass(frozen=True, eq=False)
class MatricialSystem:
    """Matrix-valued functions: ``blocks[n][i, j, s] = phi_n(i, j)(t_s)``."""

    space: ProbabilitySpace
    blocks: tuple
    label: str = ""

    def __post_init__(self):
        bl = []
        for b in self.blocks:
            b = _frozen(b, np.complex128)
            if b.ndim != 3 or b.shape[0] != b.shape[1] or b.shape[2] != self.space.size:
                raise ValueError("each block must be d x d x M")
            if not np.all(np.isfinite(b)):
                raise ValueError("block values must be finite")
            bl.append(b)
        if not bl:
            raise ValueError("need at least one block")
        object.__setattr__(self, "blocks", tuple(bl))

    @property
    def dims(self):
        return [b.shape[0] for b in self.blocks]

    @property
    def N(self):
        return len(self.blocks)

    @property
    def M(self):
        return self.space.size

    def matrices(self, n):
        """Block ``n`` as an ``M x d x d`` stack."""
        return np.moveaxis(self.blocks[n], 2, 0)

    def sup_op_norms(self):
        return np.array([np.linalg.norm(self.matrices(n), ord=2, axis=(1, 2)).max() for n in range(self.N)])

    def flatten(self):
        """The scalar system ``{d_n^{1/2} phi_n(i, j)}``, rows ordered (n, i, j)."""
        rows = [np.sqrt(b.shape[0]) * b.reshape(-1, self.M) for b in self.blocks]
        return FunctionSystem(self.space, np.vstack(rows), self.label + ":flat")

    def to_dict(self):
        return {
            "space": self.space.to_dict(),
            "N": self.N,
            "dims": self.dims,
            "values": [[[[float(z.real), float(z.imag)] for z in row] for row in b.reshape(-1, self.M)]
                       for b in self.blocks],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d):
        space = ProbabilitySpace.from_dict(d["space"])
        blocks = []
        for dim, vals in zip(d["dims"], d["values"]):
            arr = np.array(vals, dtype=np.float64)
            blocks.append((arr[..., 0] + 1j * arr[..., 1]).reshape(dim, dim, space.size))
        if len(blocks) != d["N"]:
            raise ValueError("N does not match the number of blocks")
        return cls(space, tuple(blocks), d.get("label", ""))


@dataclass(frozen=True)
class GramReport:
    gram: np.ndarray
    deviation: float
    inverse_norm_bound: float | str
    inverse_norm: float | str = field(default="singular")

    @property
    def singular(self):
        return self.inverse_norm_bound == "singular"


def _check_same_space(f_space, g_space):
    if not f_space.same_as(g_space):
        raise IncompatibleSystems("systems are sampled on different probability spaces")


def _row(f):
    if isinstance(f, tuple):
        sys, n = f
        return sys.space, sys.values[n]
    if f.N != 1:
        raise ValueError("pass a one-row system or a (system, row) pair")
    return f.space, f.values[0]


def inner_product(f, g):
    """``sum_i w_i f(t_i) conj(g(t_i))``.

    ``f`` and ``g`` are one-row systems or ``(system, n)`` pairs.
    """
    sf, fv = _row(f)
    sg, gv = _row(g)
    _check_same_space(sf, sg)
    return complex(np.sum(sf.weights * fv * np.conj(gv)))


def _as_scalar_system(sys):
    return sys.flatten() if isinstance(sys, MatricialSystem) else sys


def biorthogonality_gram(sysA, sysB):
    """Gram matrix ``<phi_n, psi_k>`` with deviation from the identity.

    Matricial systems are flattened with the ``d^{1/2}`` normalization, so
    the ideal pattern is the identity in both cases.
    """
    A = _as_scalar_system(sysA)
    B = _as_scalar_system(sysB)
    _check_same_space(A.space, B.space)
    if A.N != B.N:
        raise IncompatibleSystems(f"size mismatch: {A.N} vs {B.N}")
    G = (A.values * A.space.weights) @ B.values.conj().T
    theta = float(np.linalg.norm(G - np.eye(A.N), ord=2))
    smin = float(np.linalg.svd(G, compute_uv=False).min())
    if smin <= 1e-12 * max(1.0, np.abs(G).max()):
        return GramReport(G, theta, "singular", "singular")
    inv_norm = 1.0 / smin
    bound = 1.0 / (1.0 - theta) if theta < 1 else inv_norm
    return GramReport(G, theta, bound, inv_norm)


def tensor_product_system(sys1, sys2, cap=DEFAULT_PRODUCT_CAP):
    """Row-wise product ``phi^1_n(t_1) phi^2_n(t_2)`` on the product space.

    For matricial systems this is the dotted product ``psi^1_n(t_1) psi^2_n(t_2)``
    (matrix multiplication per point pair).  Point ``(i, j)`` is stored at
    flat index ``i * M2 + j``.
    """
    if isinstance(sys1, MatricialSystem) != isinstance(sys2, MatricialSystem):
        raise IncompatibleSystems("cannot mix scalar and matricial systems")
    if sys1.N != sys2.N:
        raise IncompatibleSystems(f"size mismatch: {sys1.N} vs {sys2.N}")
    size = sys1.M * sys2.M
    if size > cap:
        raise ProductTooLarge(
            f"product grid has {size} points (cap {cap}); use LazyProduct for sampled-grid evaluation")
    space = sys1.space.product(sys2.space)
    label = f"({sys1.label})x({sys2.label})"
    if isinstance(sys1, MatricialSystem):
        if sys1.dims != sys2.dims:
            raise IncompatibleSystems("block dimensions differ")
        blocks = []
        for b1, b2 in zip(sys1.blocks, sys2.blocks):
            prod = np.einsum("iks,kjr->ijsr", b1, b2)
            blocks.append(prod.reshape(b1.shape[0], b1.shape[1], size))
        return MatricialSystem(space, tuple(blocks), label)
    vals = (sys1.values[:, :, None] * sys2.values[:, None, :]).reshape(sys1.N, size)
    return FunctionSystem(space, vals, label)


class LazyProduct:
    """k-fold product of scalar systems, never materialized.

    Rows are ``prod_q phi^q_n(t_q)``; only sup-norm style functionals are
    provided, through :func:`sidonlab.kernels.product_grid_sup`.
    """

    def __init__(self, factors):
        factors = list(factors)
        if not factors:
            raise ValueError("need at least one factor")
        N = factors[0].N
        if any(f.N != N for f in factors):
            raise IncompatibleSystems("factors have different sizes")
        self.factors = tuple(factors)
        self.N = N

    @classmethod
    def power(cls, sys, k):
        return cls([sys] * k)

    @property
    def k(self):
        return len(self.factors)

    @property
    def grid_size(self):
        return int(np.prod([f.M for f in self.factors], dtype=float))

    def value_at(self, a, idx):
        """``sum_n a_n prod_q phi^q_n(t_{idx_q})``."""
        prod = np.asarray(a, dtype=complex).copy()
        for f, i in zip(self.factors, idx):
            prod = prod * f.values[:, i]
        return complex(prod.sum())

    def sup(self, a):
        from .kernels import product_grid_sup
        return product_grid_sup(a, [f.values for f in self.factors])

    def materialize(self, cap=DEFAULT_PRODUCT_CAP):
        out = self.factors[0]
        for f in self.factors[1:]:
            out = tensor_product_system(out, f, cap=cap)
        return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def dump_system(sys, path):
    Path(path).write_text(json.dumps(sys.to_dict()))


def load_system(path):
    d = json.loads(Path(path).read_text())
    if "dims" in d:
        return MatricialSystem.from_dict(d)
    return FunctionSystem.from_dict(d)

"""Orthonormal transforms and matrix-free sensing operators.

Every sensing operator here has orthonormal rows (``W W^T = I``), so its
adjoint is also its pseudo-inverse.  Operators act on images flattened in
row-major order; DCT coefficient ``(r, c)`` of an ``N x N`` image sits at
flat index ``r * N + c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from .model import Allocation, allocate, apply_threshold_rule, band_labels, capacity_diagram

__all__ = [
    "SCHEMES",
    "BlockSensingOperator",
    "LinearOperator",
    "MeasurementSet",
    "RandomMixer",
    "SchemeSpec",
    "build_scheme",
    "dct2_forward",
    "dct2_inverse",
    "fwht",
    "haar2_forward",
    "haar2_inverse",
    "haar_subbands",
    "measure",
    "random_mixing_operator",
    "uca_plan",
    "zigzag_order",
]


def _check_square(image):
    image = np.asarray(image, dtype=float)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise ValueError(f"expected a square 2-D array, got shape {image.shape}")
    return image


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


def dct2_forward(image):
    """Orthonormal 2-D DCT-II."""
    return fft.dctn(_check_square(image), type=2, norm="ortho")


def dct2_inverse(coefficients):
    return fft.idctn(_check_square(coefficients), type=2, norm="ortho")


def _haar_levels(n, levels):
    if not _is_pow2(n):
        raise ValueError(f"Haar transform needs a power-of-two side, got {n}")
    full = n.bit_length() - 1
    if levels is None:
        return full
    if not 0 <= levels <= full:
        raise ValueError(f"levels must be in [0, {full}]")
    return levels


def haar2_forward(image, levels=None):
    """Orthonormal 2-D Haar wavelet transform in Mallat layout.

    After each level the approximation occupies the top-left quadrant of
    the current block, with horizontal, vertical and diagonal details in
    the top-right, bottom-left and bottom-right quadrants.
    """
    out = _check_square(image).copy()
    n = out.shape[0]
    for _ in range(_haar_levels(n, levels)):
        block = out[:n, :n]
        lo = (block[:, 0::2] + block[:, 1::2]) / math.sqrt(2.0)
        hi = (block[:, 0::2] - block[:, 1::2]) / math.sqrt(2.0)
        block = np.hstack([lo, hi])
        lo = (block[0::2, :] + block[1::2, :]) / math.sqrt(2.0)
        hi = (block[0::2, :] - block[1::2, :]) / math.sqrt(2.0)
        out[:n, :n] = np.vstack([lo, hi])
        n //= 2
    return out


def haar2_inverse(coefficients, levels=None):
    out = _check_square(coefficients).copy()
    full = out.shape[0]
    depth = _haar_levels(full, levels)
    n = full >> (depth - 1) if depth else full
    for _ in range(depth):
        block = out[:n, :n]
        h = n // 2
        rows = np.empty_like(block)
        rows[0::2, :] = (block[:h, :] + block[h:, :]) / math.sqrt(2.0)
        rows[1::2, :] = (block[:h, :] - block[h:, :]) / math.sqrt(2.0)
        cols = np.empty_like(rows)
        cols[:, 0::2] = (rows[:, :h] + rows[:, h:]) / math.sqrt(2.0)
        cols[:, 1::2] = (rows[:, :h] - rows[:, h:]) / math.sqrt(2.0)
        out[:n, :n] = cols
        n *= 2
    return out


def haar_subbands(coefficients, levels=None):
    """Detail subbands of a Mallat-layout Haar transform.

    Returns a list of ``(level, orientation, array)`` with level 1 the
    finest and orientation one of ``"h"``, ``"v"``, ``"d"``.
    """
    coefficients = _check_square(coefficients)
    n = coefficients.shape[0]
    depth = _haar_levels(n, levels)
    out = []
    for level in range(1, depth + 1):
        h = n >> level
        out.append((level, "h", coefficients[:h, h : 2 * h]))
        out.append((level, "v", coefficients[h : 2 * h, :h]))
        out.append((level, "d", coefficients[h : 2 * h, h : 2 * h]))
    return out


def fwht(x):
    """Orthonormal fast Walsh-Hadamard transform along the last axis (natural order)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if not _is_pow2(n):
        raise ValueError(f"length must be a power of two, got {n}")
    lead = x.shape[:-1]
    y = x.reshape(-1, n).copy()
    h = 1
    while h < n:
        y = y.reshape(-1, n // (2 * h), 2, h)
        a = y[:, :, 0, :]
        b = y[:, :, 1, :]
        y = np.stack([a + b, a - b], axis=2)
        h *= 2
    return y.reshape(lead + (n,)) / math.sqrt(n)


def zigzag_order(n):
    """All ``(row, col)`` indices of an ``n x n`` array in JPEG zig-zag order.

    Anti-diagonal ``s = row + col`` is walked with increasing row for odd
    ``s`` and decreasing row for even ``s``, starting at ``(0, 0), (0, 1)``.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    r, c = np.divmod(np.arange(n * n), n)
    s = r + c
    order = np.lexsort((np.where(s % 2 == 1, r, -r), s))
    return np.column_stack([r[order], c[order]])


class LinearOperator:
    """A matrix-free linear map ``R^in_dim -> R^out_dim`` with its adjoint."""

    def __init__(self, in_dim, out_dim, apply, adjoint, name="operator"):
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self._apply = apply
        self._adjoint = adjoint
        self.name = name

    @property
    def shape(self):
        return (self.out_dim, self.in_dim)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.size != self.in_dim:
            raise ValueError(f"{self.name}: input has {x.size} entries, expected {self.in_dim}")
        return self._apply(x.ravel())

    def adjoint(self, y):
        y = np.asarray(y, dtype=float)
        if y.size != self.out_dim:
            raise ValueError(f"{self.name}: measurement has {y.size} entries, expected {self.out_dim}")
        return self._adjoint(y.ravel())

    def to_dense(self):
        """Materialize the matrix column by column (small operators only)."""
        eye = np.eye(self.in_dim)
        return np.column_stack([self.apply(col) for col in eye])

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} {self.out_dim}x{self.in_dim}>"


class RandomMixer(LinearOperator):
    """``m`` rows of a random orthogonal ``n x n`` mixing matrix.

    For power-of-two ``n`` the matrix is ``H D``: random signs followed by
    the orthonormal Walsh-Hadamard transform, so every entry is
    ``+-1/sqrt(n)``.  For other ``n`` a random permutation is inserted and
    the orthonormal DCT-II replaces ``H``, which keeps the rows exactly
    orthonormal without padding.  Both apply in ``O(n log n)``.
    """

    def __init__(self, n, m, seed=None):
        n, m = int(n), int(m)
        if n < 0:
            raise ValueError("n must be non-negative")
        if not 0 <= m <= n:
            raise ValueError(f"cannot take {m} rows from an {n}-point mixing")
        rng = np.random.default_rng(seed)
        self.kind = "hadamard" if _is_pow2(n) else "dct"
        self.signs = rng.choice(np.array([-1.0, 1.0]), size=n)
        self.perm = np.arange(n) if self.kind == "hadamard" else rng.permutation(n)
        self.rows = np.sort(rng.choice(n, size=m, replace=False))
        self.seed = seed
        super().__init__(n, m, self._mix, self._unmix, name=f"mix[{self.kind}]")

    def _transform(self, v):
        return fwht(v) if self.kind == "hadamard" else fft.dct(v, type=2, norm="ortho")

    def _inverse_transform(self, v):
        return fwht(v) if self.kind == "hadamard" else fft.idct(v, type=2, norm="ortho")

    def _mix(self, x):
        return self._transform((self.signs * x)[self.perm])[self.rows]

    def _unmix(self, y):
        full = np.zeros(self.in_dim)
        full[self.rows] = y
        z = np.empty(self.in_dim)
        z[self.perm] = self._inverse_transform(full)
        return self.signs * z


def random_mixing_operator(n, m, seed=None):
    """Row-orthonormal random binary-style mixing; see :class:`RandomMixer`."""
    if m > n:
        raise ValueError(f"m={m} exceeds n={n}")
    return RandomMixer(n, m, seed)


class BlockSensingOperator(LinearOperator):
    """Measure selected transform coefficients directly and mix a pool of others.

    ``y = [c[direct], mixer(c[pool])]`` with ``c`` the flattened DCT (or the
    pixels themselves when ``transform == "identity"``).  Direct and pool
    index sets are disjoint, which makes the rows orthonormal.
    """

    def __init__(self, side, direct, pool, mixer=None, transform="dct", name="scheme"):
        self.side = int(side)
        d = self.side * self.side
        self.direct = np.asarray(direct, dtype=np.int64)
        self.pool = np.asarray(pool, dtype=np.int64)
        if np.intersect1d(self.direct, self.pool).size:
            raise ValueError("direct and pooled coefficients overlap")
        if mixer is None:
            mixer = RandomMixer(self.pool.size, 0)
        if mixer.in_dim != self.pool.size:
            raise ValueError("mixer size does not match the pool")
        if transform not in ("dct", "identity"):
            raise ValueError(f"unknown transform {transform!r}")
        self.mixer = mixer
        self.transform = transform
        super().__init__(d, self.direct.size + mixer.out_dim, self._forward, self._backward, name=name)

    def _analysis(self, x):
        img = x.reshape(self.side, self.side)
        return (dct2_forward(img) if self.transform == "dct" else img).ravel()

    def _synthesis(self, c):
        img = c.reshape(self.side, self.side)
        return (dct2_inverse(img) if self.transform == "dct" else img).ravel()

    def _forward(self, x):
        c = self._analysis(x)
        parts = [c[self.direct]]
        if self.mixer.out_dim:
            parts.append(self.mixer.apply(c[self.pool]))
        return np.concatenate(parts)

    def _backward(self, y):
        c = np.zeros(self.in_dim)
        nd = self.direct.size
        c[self.direct] = y[:nd]
        if self.mixer.out_dim:
            c[self.pool] = self.mixer.adjoint(y[nd:])
        return self._synthesis(c)


#: Scheme names and the decoder each is paired with.
SCHEMES = {
    "dct-linear": "linear",
    "dct-tv": "tv",
    "romberg": "tv",
    "random": "tv",
    "uca": "tv",
}


@dataclass(frozen=True)
class SchemeSpec:
    """A sensing scheme: ``name`` in :data:`SCHEMES` plus its parameters.

    ``n_dct`` is the number of leading zig-zag DCT rows of the Romberg
    hybrid; ``sigma`` is the noise level the UCA allocation plans for.
    ``allocation`` optionally fixes the UCA band allocation instead of
    deriving it from the model's capacity diagram.
    """

    name: str
    seed: int = 0
    n_dct: int = 1000
    sigma: float = 0.0
    p: int | None = None
    allocation: Allocation | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.name not in SCHEMES:
            raise ValueError(f"unknown scheme {self.name!r}; choose from {sorted(SCHEMES)}")
        if self.n_dct < 0:
            raise ValueError("n_dct must be non-negative")
        if self.p is not None and self.name == "romberg" and self.n_dct > self.p:
            raise ValueError("romberg n_dct exceeds p")

    @property
    def decoder(self):
        return SCHEMES[self.name]

    def to_text(self):
        lines = [f"scheme = {self.name}", f"seed = {self.seed}", f"n_dct = {self.n_dct}", f"sigma = {self.sigma!r}"]
        if self.p is not None:
            lines.insert(1, f"p = {self.p}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        values = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"malformed scheme line: {raw!r}")
            values[key.strip()] = value.strip()
        unknown = set(values) - {"scheme", "p", "n_dct", "seed", "sigma"}
        if unknown:
            raise ValueError(f"unknown scheme keys {sorted(unknown)}")
        return cls(
            name=values["scheme"],
            seed=int(values.get("seed", 0)),
            n_dct=int(values.get("n_dct", 1000)),
            sigma=float(values.get("sigma", 0.0)),
            p=int(values["p"]) if "p" in values else None,
        )


def _flat(indices, side):
    indices = np.asarray(indices)
    return indices[:, 0] * side + indices[:, 1]


def uca_plan(model, p, sigma=0.0, allocation=None):
    """Allocation and threshold plan of the bandwise random (UCA) scheme."""
    if allocation is None:
        allocation = allocate(capacity_diagram(model, sigma), p)
    if allocation.total != p:
        raise ValueError(f"allocation totals {allocation.total}, expected {p}")
    return allocation, apply_threshold_rule(allocation, model)


def build_scheme(spec, model, p=None):
    """Build the row-orthonormal operator of ``spec`` with ``p`` rows for ``model``'s images."""
    p = spec.p if p is None else int(p)
    if p is None:
        raise ValueError("number of measurements p is required")
    if model.side is None:
        raise ValueError("model is not tied to an image size")
    side = model.side
    d = side * side
    if not 1 <= p <= d:
        raise ValueError(f"p must be in [1, {d}], got {p}")
    zigzag = _flat(zigzag_order(side), side)
    empty = np.array([], dtype=np.int64)

    if spec.name in ("dct-linear", "dct-tv"):
        op = BlockSensingOperator(side, zigzag[:p], empty, name=spec.name)
    elif spec.name == "random":
        mixer = random_mixing_operator(d, p, spec.seed)
        op = BlockSensingOperator(side, empty, np.arange(d), mixer, transform="identity", name="random")
    elif spec.name == "romberg":
        n_dct = min(spec.n_dct, p)
        pool = np.sort(zigzag[n_dct:])
        mixer = random_mixing_operator(pool.size, p - n_dct, spec.seed)
        op = BlockSensingOperator(side, zigzag[:n_dct], pool, mixer, name="romberg")
    else:
        allocation, plan = uca_plan(model, p, spec.sigma, spec.allocation)
        labels = band_labels(side).ravel()
        direct = np.flatnonzero(np.isin(labels, sorted(plan.full_bands)))
        pool = np.flatnonzero(np.isin(labels, sorted(plan.mixed_bands)))
        mixer = random_mixing_operator(pool.size, plan.residual_random_count, spec.seed)
        op = BlockSensingOperator(side, direct, pool, mixer, name="uca")
        op.allocation = allocation
        op.plan = plan
    op.spec = spec
    return op


@dataclass(frozen=True)
class MeasurementSet:
    """Measurements ``y = W x + eta`` and how they were taken."""

    y: np.ndarray
    sigma: float
    seed: int | None
    scheme: str


def measure(operator, image, sigma=0.0, seed=None):
    """Apply ``operator`` to ``image`` and add white Gaussian noise of standard deviation ``sigma``."""
    image = np.asarray(image, dtype=float)
    if image.size != operator.in_dim:
        raise ValueError(f"image has {image.size} pixels, operator expects {operator.in_dim}")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    y = operator.apply(image)
    if sigma > 0:
        y = y + sigma * np.random.default_rng(seed).standard_normal(y.shape)
    return MeasurementSet(y, float(sigma), seed, operator.name)

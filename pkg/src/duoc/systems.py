"""Composite system bookkeeping.

A composite holds ``m`` classical dits followed by ``n`` anti-dits, all
of local dimension ``d``.  Factor positions are numbered ``0..m+n-1`` in
that canonical order; position ``t < m`` is the dit ``D[t]`` and position
``m + i`` is the anti-dit ``A[i]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError

MAX_COMPOSITE_DIM = 4096


@dataclass(frozen=True)
class SystemSignature:
    """Shape of a composite: local dimension ``d``, ``m`` dits, ``n`` anti-dits."""

    d: int
    m: int
    n: int

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"local dimension must be >= 2, got {self.d}")
        if self.m < 0 or self.n < 0 or self.m + self.n == 0:
            raise DomainError(f"need m, n >= 0 with m + n >= 1, got ({self.m}, {self.n})")
        if self.d ** (self.m + self.n) > MAX_COMPOSITE_DIM:
            raise DomainError(
                f"composite dimension {self.d ** (self.m + self.n)} exceeds cap {MAX_COMPOSITE_DIM}"
            )

    @property
    def num_factors(self) -> int:
        return self.m + self.n

    @property
    def dim(self) -> int:
        return self.d ** (self.m + self.n)

    @property
    def dims(self) -> tuple:
        return (self.d,) * (self.m + self.n)

    @property
    def kinds(self) -> tuple:
        """Per-factor kind string, 'D' for dits then 'A' for anti-dits."""
        return ("D",) * self.m + ("A",) * self.n

    @property
    def num_pairs(self) -> int:
        return min(self.m, self.n)

    def is_classical(self) -> bool:
        return self.n == 0

    def is_anticlassical(self) -> bool:
        return self.m == 0

    def sub_signature(self, positions) -> "SystemSignature":
        """Signature of the sub-composite at the given factor positions."""
        positions = tuple(int(p) for p in positions)
        if len(set(positions)) != len(positions) or any(
            p < 0 or p >= self.num_factors for p in positions
        ):
            raise DomainError(f"positions {positions} invalid for {self.num_factors} factors")
        if not positions:
            raise DomainError("sub-composite needs at least one factor")
        kinds = [self.kinds[p] for p in positions]
        return SystemSignature(self.d, kinds.count("D"), kinds.count("A"))


@dataclass(frozen=True)
class FactorPermutation:
    """Kind-preserving relabeling of factors.

    ``sigma[t]`` is the destination of dit ``t`` among the dits, and
    ``tau[i]`` the destination of anti-dit ``i`` among the anti-dits.
    Composition follows function order: ``p2.compose(p1)`` applies
    ``p1`` first.
    """

    sigma: tuple
    tau: tuple

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(x) for x in self.sigma))
        object.__setattr__(self, "tau", tuple(int(x) for x in self.tau))
        for name, perm in (("sigma", self.sigma), ("tau", self.tau)):
            if sorted(perm) != list(range(len(perm))):
                raise DomainError(f"{name}={perm} is not a permutation")

    @classmethod
    def identity(cls, m: int, n: int) -> "FactorPermutation":
        return cls(tuple(range(m)), tuple(range(n)))

    def is_identity(self) -> bool:
        return self.sigma == tuple(range(len(self.sigma))) and self.tau == tuple(
            range(len(self.tau))
        )

    def compose(self, other: "FactorPermutation") -> "FactorPermutation":
        """Permutation equal to ``other`` followed by ``self``."""
        if len(self.sigma) != len(other.sigma) or len(self.tau) != len(other.tau):
            raise DomainError("cannot compose permutations of different shapes")
        sigma = tuple(self.sigma[other.sigma[t]] for t in range(len(self.sigma)))
        tau = tuple(self.tau[other.tau[i]] for i in range(len(self.tau)))
        return FactorPermutation(sigma, tau)

    def inverse(self) -> "FactorPermutation":
        sigma = tuple(int(x) for x in np.argsort(self.sigma))
        tau = tuple(int(x) for x in np.argsort(self.tau))
        return FactorPermutation(sigma, tau)

    def destinations(self, m: int, n: int) -> tuple:
        """Flat destination list over all ``m + n`` factors."""
        if len(self.sigma) != m or len(self.tau) != n:
            raise DomainError(
                f"permutation shape ({len(self.sigma)}, {len(self.tau)}) != ({m}, {n})"
            )
        return tuple(self.sigma) + tuple(m + i for i in self.tau)


def index_to_digits(index: int, d: int, width: int) -> tuple:
    """Base-``d`` digits of ``index``, most significant first."""
    if index < 0 or index >= d**width:
        raise DomainError(f"index {index} out of range for {width} base-{d} digits")
    digits = []
    for _ in range(width):
        digits.append(index % d)
        index //= d
    return tuple(reversed(digits))


def digits_to_index(digits, d: int) -> int:
    idx = 0
    for g in digits:
        g = int(g)
        if g < 0 or g >= d:
            raise DomainError(f"digit {g} out of range for base {d}")
        idx = idx * d + g
    return idx


def sector_of_basis_pair(d: int, i: int, j: int) -> int:
    """Parity sector of the basis pair |i>|j> on one dit/anti-dit pair."""
    if not (0 <= i < d and 0 <= j < d):
        raise DomainError(f"basis labels ({i}, {j}) out of range for d={d}")
    return (j - i) % d


def parity_projector(d: int, k: int) -> np.ndarray:
    """Projector onto the parity-``k`` sector of one dit/anti-dit pair.

    The sector is spanned by ``|i>|i + k mod d>`` for ``i = 0..d-1``.
    """
    if k < 0 or k >= d:
        raise DomainError(f"parity {k} out of range for d={d}")
    out = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        idx = i * d + (i + k) % d
        out[idx, idx] = 1.0
    return out


def shift_matrix(d: int, j: int) -> np.ndarray:
    """Cyclic shift ``X^j`` on one factor: ``|s> -> |s + j mod d>``."""
    j = int(j) % d
    out = np.zeros((d, d), dtype=complex)
    for s in range(d):
        out[(s + j) % d, s] = 1.0
    return out


def phase_matrix(d: int, j: int) -> np.ndarray:
    """Diagonal phase ``Z^j`` on one factor: ``|s> -> omega^(s + j mod d) |s>``.

    The offset ``j`` only contributes a relabeling of the global phase;
    observable consequences depend on phase differences alone.
    """
    j = int(j) % d
    omega = np.exp(2j * np.pi / d)
    return np.diag([omega ** ((s + j) % d) for s in range(d)])


def embed_permutation(sig: SystemSignature, perm: FactorPermutation) -> np.ndarray:
    """Unitary on the full composite that realizes a factor permutation."""
    from .linalg import factor_permutation_matrix

    dest = perm.destinations(sig.m, sig.n)
    return factor_permutation_matrix(sig.dims, dest)


def all_factor_permutations(m: int, n: int):
    """Iterate every kind-preserving factor permutation of an (m, n) composite."""
    for sigma in itertools.permutations(range(m)):
        for tau in itertools.permutations(range(n)):
            yield FactorPermutation(sigma, tau)

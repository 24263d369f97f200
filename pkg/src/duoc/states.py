"""States of dit / anti-dit composites.

Pure states of an ``(m, n)`` composite are, up to a factor relabeling,
of the form ``sum_x alpha_x |x> (X^s |x>) |tail>``: each dit is paired
with an anti-dit whose digits track the dit's digits up to a fixed
per-pair shift (the parity vector ``s``), and unpaired factors of the
longer kind carry a fixed digit string.  Mixed states are convex
mixtures of such pure states.

Pair ``i`` couples dit ``D[i]`` with anti-dit ``A[i]`` before the
relabeling is applied; the tail sits on the trailing factors of the
longer kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .errors import (
    DegenerateInputError,
    DensityMatrixError,
    DomainError,
    NormalizationError,
    NotClassicalError,
    ShapeError,
    ValidityError,
)
from .linalg import (
    DEFAULT_ATOL,
    as_operator,
    as_vector,
    hermiticity_defect,
    min_eigenvalue,
    partial_trace,
    permute_vector_factors,
    projector,
)
from .systems import (
    FactorPermutation,
    SystemSignature,
    digits_to_index,
    index_to_digits,
)

# factorial growth of the relabeling search; larger sides need certificates
MAX_PERM_FACTORS = 3


@dataclass
class ValidityReport:
    """Outcome of a membership check.

    ``residual`` is the leaked mass (or reconstruction defect) of the
    best candidate found; ``witness`` describes that candidate.  A
    ``NON-EXHAUSTIVE`` flag marks checks that can miss valid inputs.
    """

    valid: bool
    residual: float
    witness: object = None
    flags: tuple = ()


@dataclass(eq=False)
class PureStateSpec:
    """Constructive description of a valid pure state.

    Parameters
    ----------
    sig : SystemSignature
    coeffs : dict
        Map from digit strings ``x`` (tuples of length ``min(m, n)``,
        or the empty tuple when one side is absent) to complex
        amplitudes.  Must be normalized.
    parity : tuple
        Per-pair shift ``s``; anti-dit ``A[i]`` carries ``x_i + s_i mod d``.
    tail : tuple
        Digits of the unpaired trailing factors, length ``|m - n|``.
    perm : FactorPermutation
        Relabeling applied after the paired construction.
    """

    sig: SystemSignature
    coeffs: dict
    parity: tuple = ()
    tail: tuple = ()
    perm: FactorPermutation = None
    norm_atol: float = field(default=1e-10, compare=False)

    def __post_init__(self):
        sig = self.sig
        p = sig.num_pairs
        self.parity = tuple(int(x) for x in self.parity) or (0,) * p
        self.tail = tuple(int(x) for x in self.tail) or (0,) * abs(sig.m - sig.n)
        if self.perm is None:
            self.perm = FactorPermutation.identity(sig.m, sig.n)
        if len(self.perm.sigma) != sig.m or len(self.perm.tau) != sig.n:
            raise DomainError("factor permutation shape does not match the signature")
        if len(self.parity) != p:
            raise DomainError(f"parity vector must have length {p}")
        if any(s < 0 or s >= sig.d for s in self.parity):
            raise DomainError(f"parity entries must lie in 0..{sig.d - 1}")
        if len(self.tail) != abs(sig.m - sig.n):
            raise DomainError(f"tail must have length {abs(sig.m - sig.n)}")
        if any(t < 0 or t >= sig.d for t in self.tail):
            raise DomainError(f"tail digits must lie in 0..{sig.d - 1}")
        coeffs = {}
        for x, a in self.coeffs.items():
            x = tuple(int(g) for g in (x if isinstance(x, (tuple, list)) else (x,)))
            if len(x) != p:
                raise DomainError(f"coefficient key {x} must have length {p}")
            if any(g < 0 or g >= sig.d for g in x):
                raise DomainError(f"coefficient key {x} has digits outside 0..{sig.d - 1}")
            if x in coeffs:
                raise DomainError(f"duplicate coefficient key {x}")
            coeffs[x] = complex(a)
        if not coeffs:
            raise DegenerateInputError("a pure state needs at least one coefficient")
        total = sum(abs(a) ** 2 for a in coeffs.values())
        if abs(total - 1.0) > self.norm_atol:
            raise NormalizationError(f"coefficients have squared norm {total}, expected 1")
        self.coeffs = coeffs


def build_pure_state(spec: PureStateSpec) -> np.ndarray:
    """Dense state vector for a :class:`PureStateSpec`."""
    sig = spec.sig
    d, m, n = sig.d, sig.m, sig.n
    p = sig.num_pairs
    v = np.zeros(sig.dim, dtype=complex)
    for x, amp in sorted(spec.coeffs.items()):
        dits = list(x) + [0] * (m - p)
        antis = [(x[i] + spec.parity[i]) % d for i in range(p)] + [0] * (n - p)
        if m > n:
            dits[p:] = spec.tail
        else:
            antis[p:] = spec.tail
        v[digits_to_index(dits + antis, d)] = amp
    if spec.perm.is_identity():
        return v
    return permute_vector_factors(v, sig.dims, spec.perm.destinations(m, n))


def _pattern_leak(v_pre: np.ndarray, sig: SystemSignature):
    """Given a vector in unpermuted layout, fit the paired-support pattern.

    Reads the parity vector and tail off the largest amplitude, then
    returns ``(leak, parity, tail)`` where ``leak`` is the norm of the
    amplitude mass that violates the fitted pattern.
    """
    d, m, n = sig.d, sig.m, sig.n
    p = sig.num_pairs
    ref = int(np.argmax(np.abs(v_pre)))
    digits = index_to_digits(ref, d, m + n)
    dits, antis = digits[:m], digits[m:]
    parity = tuple((antis[i] - dits[i]) % d for i in range(p))
    tail = dits[p:] if m > n else antis[p:]
    leak_sq = 0.0
    for idx in np.nonzero(np.abs(v_pre) > 0)[0]:
        dg = index_to_digits(int(idx), d, m + n)
        c, a = dg[:m], dg[m:]
        ok = all((a[i] - c[i]) % d == parity[i] for i in range(p))
        ok = ok and (c[p:] if m > n else a[p:]) == tail
        if not ok:
            leak_sq += abs(v_pre[idx]) ** 2
    return float(np.sqrt(leak_sq)), parity, tail


def validate_pure_state(
    v,
    sig: SystemSignature,
    atol: float = DEFAULT_ATOL,
    max_perm_factors: int = MAX_PERM_FACTORS,
) -> ValidityReport:
    """Exhaustively test whether ``v`` is a valid pure state of ``sig``.

    Searches every kind-preserving factor relabeling, so the cost grows
    as ``m! * n!``; sides larger than ``max_perm_factors`` are refused
    (use certificate comparison via :func:`certificate_matches` there).

    Returns a report whose witness, when valid, records the relabeling,
    parity vector and tail that exhibit the paired structure.
    """
    vec = as_vector(v)
    if vec.size != sig.dim:
        raise ShapeError(f"vector length {vec.size} != composite dimension {sig.dim}")
    nrm = np.linalg.norm(vec)
    if abs(nrm - 1.0) > 1e-10:
        raise NormalizationError(f"state vector has norm {nrm}, expected 1")
    if sig.m > max_perm_factors or sig.n > max_perm_factors:
        raise DomainError(
            f"exhaustive relabeling search refused for ({sig.m}, {sig.n}); "
            "verify against a certificate instead"
        )
    best = None
    for sigma in permutations(range(sig.m)):
        for tau in permutations(range(sig.n)):
            perm = FactorPermutation(sigma, tau)
            if perm.is_identity():
                v_pre = vec
            else:
                v_pre = permute_vector_factors(
                    vec, sig.dims, perm.inverse().destinations(sig.m, sig.n)
                )
            leak, parity, tail = _pattern_leak(v_pre, sig)
            cand = (leak, {"sigma": sigma, "tau": tau, "parity": parity, "tail": tail})
            if best is None or leak < best[0]:
                best = cand
            if leak <= atol:
                return ValidityReport(valid=True, residual=leak, witness=cand[1])
    return ValidityReport(valid=False, residual=best[0], witness=best[1])


def certificate_matches(spec: PureStateSpec, v, atol: float = DEFAULT_ATOL) -> ValidityReport:
    """Check that ``v`` equals the state built from ``spec`` up to global phase."""
    vec = as_vector(v)
    built = build_pure_state(spec)
    if vec.size != built.size:
        raise ShapeError("vector length does not match the certificate's composite")
    defect = float(np.max(np.abs(projector(built) - projector(vec))))
    return ValidityReport(valid=defect <= atol, residual=defect, witness=spec)


def basis_state_spec(sig: SystemSignature, digits) -> PureStateSpec:
    """Spec of the computational basis state with the given digit string.

    Every basis product vector is a valid pure state: each dit/anti-dit
    pair has the definite parity read off its digits, and unpaired
    digits form the tail.
    """
    digits = tuple(int(g) for g in digits)
    if len(digits) != sig.num_factors:
        raise DomainError(f"need {sig.num_factors} digits, got {len(digits)}")
    p = sig.num_pairs
    dits, antis = digits[: sig.m], digits[sig.m :]
    parity = tuple((antis[i] - dits[i]) % sig.d for i in range(p))
    tail = dits[p:] if sig.m > sig.n else antis[p:]
    return PureStateSpec(sig, {tuple(dits[:p]): 1.0}, parity=parity, tail=tail)


@dataclass(eq=False)
class DensityState:
    """Density matrix tagged with its composite signature.

    Construction enforces Hermiticity, positivity and unit trace within
    ``atol`` (eigenvalues may dip to ``-atol``); it does not by itself
    certify membership in the model's state set.
    """

    sig: SystemSignature
    matrix: np.ndarray
    atol: float = field(default=1e-10, compare=False)

    def __post_init__(self):
        mat = as_operator(self.matrix)
        if mat.shape[0] != self.sig.dim:
            raise ShapeError(f"matrix dim {mat.shape[0]} != composite dimension {self.sig.dim}")
        defect = hermiticity_defect(mat)
        if defect > self.atol:
            raise DensityMatrixError(f"matrix is not Hermitian (defect {defect})")
        mat = (mat + mat.conj().T) / 2
        tr = float(np.real(np.trace(mat)))
        if abs(tr - 1.0) > self.atol:
            raise DensityMatrixError(f"matrix has trace {tr}, expected 1")
        lo = min_eigenvalue(mat)
        if lo < -self.atol:
            raise DensityMatrixError(f"matrix has negative eigenvalue {lo}")
        self.matrix = mat

    @classmethod
    def from_vector(cls, sig: SystemSignature, v) -> "DensityState":
        return cls(sig, projector(v))

    @property
    def dim(self) -> int:
        return self.sig.dim


@dataclass(eq=False)
class SeparableSpec:
    """Description of a separable state.

    Exactly one of the two forms must be given:

    ``gamma``
        Map ``(i, j) -> weight`` over product basis labels of a (1, 1)
        composite; the state is ``sum gamma_ij |ij><ij|``.
    ``terms``
        List of ``(weight, dit_digits, anti_state)`` triples for general
        ``(m, n)``: classical basis state on the dits, valid (diagonal)
        anti-classical state on the anti-dits.
    """

    gamma: dict = None
    terms: list = None

    def __post_init__(self):
        if (self.gamma is None) == (self.terms is None):
            raise DomainError("give exactly one of gamma= or terms=")
        if self.gamma is not None:
            weights = list(self.gamma.values())
        else:
            weights = [w for w, _, _ in self.terms]
        if any(w < -1e-12 for w in weights):
            raise DomainError("separable weights must be nonnegative")
        total = float(sum(weights))
        if abs(total - 1.0) > 1e-9:
            raise NormalizationError(f"separable weights sum to {total}, expected 1")


def build_separable(spec: SeparableSpec, sig: SystemSignature) -> DensityState:
    """Assemble the density matrix described by a :class:`SeparableSpec`."""
    d = sig.d
    rho = np.zeros((sig.dim, sig.dim), dtype=complex)
    if spec.gamma is not None:
        if (sig.m, sig.n) != (1, 1):
            raise DomainError("gamma form is only defined on a (1, 1) composite")
        for (i, j), w in spec.gamma.items():
            if not (0 <= i < d and 0 <= j < d):
                raise DomainError(f"basis labels ({i}, {j}) out of range for d={d}")
            rho[i * d + j, i * d + j] += w
    else:
        for w, dits, anti in spec.terms:
            dits = tuple(int(g) for g in dits)
            if len(dits) != sig.m:
                raise DomainError(f"dit string {dits} must have length {sig.m}")
            if anti.sig != SystemSignature(d, 0, sig.n):
                raise DomainError("anti-classical factor has the wrong signature")
            off = float(np.max(np.abs(anti.matrix - np.diag(np.diag(anti.matrix)))))
            if off > 1e-10:
                raise ValidityError(f"anti-classical factor is not diagonal (defect {off})")
            block = np.zeros((d**sig.m, d**sig.m), dtype=complex)
            block[digits_to_index(dits, d), digits_to_index(dits, d)] = 1.0
            rho += w * np.kron(block, anti.matrix)
    return DensityState(sig, rho)


def _cross_sector_mass(mat: np.ndarray, d: int) -> float:
    """Largest entry coupling different parity sectors of a (1, 1) matrix."""
    idx = np.arange(d * d)
    sector = (idx % d - idx // d) % d
    cross = sector[:, None] != sector[None, :]
    return float(np.max(np.abs(mat[cross]))) if np.any(cross) else 0.0


def validate_mixed_state(
    rho: DensityState,
    certificate=None,
    atol: float = DEFAULT_ATOL,
) -> ValidityReport:
    """Test whether ``rho`` is a mixture of valid pure states.

    The check is exact for classical and anti-classical composites
    (diagonal matrices), for (1, 1) composites (parity-block-diagonal
    matrices), and whenever a certificate is supplied.  Otherwise the
    eigendecomposition is tried as a candidate certificate; a negative
    answer from that path is flagged ``NON-EXHAUSTIVE``.

    Parameters
    ----------
    certificate : list of (weight, PureStateSpec), optional
        Claimed convex decomposition; verified by reconstruction.
    """
    sig = rho.sig
    mat = rho.matrix
    if certificate is not None:
        if not certificate:
            raise DegenerateInputError("empty certificate")
        recon = np.zeros_like(mat)
        for w, spec in certificate:
            if w < -1e-12:
                return ValidityReport(False, float(w), witness="negative certificate weight")
            recon += max(w, 0.0) * projector(build_pure_state(spec))
        defect = float(np.max(np.abs(recon - mat)))
        return ValidityReport(defect <= atol, defect, witness="certificate")
    if sig.is_classical() or sig.is_anticlassical():
        off = float(np.max(np.abs(mat - np.diag(np.diag(mat)))))
        return ValidityReport(off <= atol, off, witness="diagonal test")
    if (sig.m, sig.n) == (1, 1):
        worst = _cross_sector_mass(mat, sig.d)
        return ValidityReport(worst <= atol, worst, witness="sector-block test")
    # fall back to the spectral decomposition as a candidate certificate
    vals, vecs = np.linalg.eigh(mat)
    worst = 0.0
    for idx in range(vals.size):
        if vals[idx] <= atol:
            continue
        rep = validate_pure_state(vecs[:, idx], sig, atol=1e-8)
        worst = max(worst, rep.residual)
        if not rep.valid:
            return ValidityReport(
                False, rep.residual, witness="spectral decomposition", flags=("NON-EXHAUSTIVE",)
            )
    return ValidityReport(True, worst, witness="spectral decomposition")


def marginal_state(rho: DensityState, keep) -> DensityState:
    """Reduced state on the factors listed in ``keep`` (ascending positions)."""
    keep = tuple(sorted(int(k) for k in keep))
    sub = rho.sig.sub_signature(keep)
    reduced = partial_trace(rho.matrix, rho.sig.dims, keep)
    return DensityState(sub, reduced)


def purify_classical_state(
    rho: DensityState,
    num_anti: int,
    parity=None,
    tail=None,
    phases=None,
    tau=None,
) -> PureStateSpec:
    """Purify a classical state by pairing each dit with a fresh anti-dit.

    ``rho`` must be a valid (diagonal) state of an ``(m, 0)`` composite
    and ``num_anti >= m``.  The returned spec reads ``sum_c sqrt(p_c)
    e^{i phase_c} |c> (X^s |c>) |tail>``; its marginal on the dits
    reproduces ``rho`` exactly, for any parity vector, tail, phases and
    anti-dit relabeling ``tau``.  The dits themselves are never
    relabeled.
    """
    sig = rho.sig
    if not sig.is_classical():
        raise DomainError("purification input must be a classical composite")
    m, d = sig.m, sig.d
    if num_anti < m:
        raise DomainError(f"need at least {m} anti-dits to purify, got {num_anti}")
    off = float(np.max(np.abs(rho.matrix - np.diag(np.diag(rho.matrix)))))
    if off > 1e-10:
        raise NotClassicalError(f"state is not diagonal (off-diagonal mass {off})")
    parity = tuple(parity) if parity is not None else (0,) * m
    tail = tuple(tail) if tail is not None else (0,) * (num_anti - m)
    tau = tau if tau is not None else tuple(range(num_anti))
    probs = np.real(np.diag(rho.matrix))
    coeffs = {}
    for idx in np.nonzero(probs > 0)[0]:
        c = index_to_digits(int(idx), d, m)
        theta = 0.0
        if phases is not None:
            theta = float(phases.get(c, 0.0))
        coeffs[c] = np.sqrt(probs[idx]) * np.exp(1j * theta)
    out_sig = SystemSignature(d, m, num_anti)
    perm = FactorPermutation(tuple(range(m)), tuple(tau))
    return PureStateSpec(out_sig, coeffs, parity=parity, tail=tail, perm=perm)


def is_entangled(v, sig: SystemSignature, atol: float = DEFAULT_ATOL) -> bool:
    """Decide entanglement of a valid (1, 1) pure state.

    Raises :class:`ValidityError` if ``v`` is not a valid pure state.
    Entangled means the dit marginal has more than one nonzero
    eigenvalue, i.e. the paired coefficients have support size >= 2.
    """
    if (sig.m, sig.n) != (1, 1):
        raise DomainError("entanglement test is defined on (1, 1) composites")
    rep = validate_pure_state(v, sig, atol=atol)
    if not rep.valid:
        raise ValidityError(f"not a valid pure state (residual {rep.residual})")
    marg = partial_trace(projector(v), sig.dims, keep=(0,))
    eigs = np.linalg.eigvalsh(marg)
    return int(np.sum(eigs > 1e-10)) >= 2


def _pair_subspace_specs(sig, perm, parity, tail):
    """Spanning family of pure specs for one (relabeling, parity, tail) cell."""
    p = sig.num_pairs
    strings = [index_to_digits(i, sig.d, p) for i in range(sig.d**p)]
    inv_sqrt2 = 1 / np.sqrt(2)
    out = []
    for x in strings:
        out.append(PureStateSpec(sig, {x: 1.0}, parity, tail, perm))
    for a in range(len(strings)):
        for b in range(a + 1, len(strings)):
            x, y = strings[a], strings[b]
            out.append(PureStateSpec(sig, {x: inv_sqrt2, y: inv_sqrt2}, parity, tail, perm))
            out.append(PureStateSpec(sig, {x: inv_sqrt2, y: 1j * inv_sqrt2}, parity, tail, perm))
    return out


def span_dimensions(sig: SystemSignature, sv_cutoff: float = 1e-8) -> tuple:
    """Real linear dimensions spanned by product states and by all valid states.

    Returns ``(product_dim, valid_dim)``.  Product states of the
    classical/anti-classical split are diagonal, so their span is probed
    with basis projectors; the valid-state span is probed with a
    deterministic family that spans every paired subspace.  Ranks are
    singular-value counts above ``sv_cutoff`` (relative to the largest).
    """
    rows_product = [np.diag(col).reshape(-1) for col in np.eye(sig.dim)]
    rows_valid = []
    p = sig.num_pairs
    tails = [index_to_digits(i, sig.d, abs(sig.m - sig.n)) for i in range(sig.d ** abs(sig.m - sig.n))]
    parities = [index_to_digits(i, sig.d, p) for i in range(sig.d**p)]
    from math import factorial

    from .systems import all_factor_permutations

    n_cells = factorial(sig.m) * factorial(sig.n) * len(parities) * len(tails)
    n_rows = n_cells * (sig.d**p) ** 2
    if n_rows * sig.dim**2 > 30_000_000:
        raise DomainError("spanning family too large for this composite; reduce the system")
    for perm in all_factor_permutations(sig.m, sig.n):
        for parity in parities:
            for tail in tails:
                for spec in _pair_subspace_specs(sig, perm, parity, tail):
                    rows_valid.append(projector(build_pure_state(spec)).reshape(-1))

    def real_rank(rows):
        a = np.array(rows)
        stacked = np.hstack([a.real, a.imag])
        sv = np.linalg.svd(stacked, compute_uv=False)
        return int(np.sum(sv > sv_cutoff * sv[0]))

    return real_rank(rows_product), real_rank(rows_valid)

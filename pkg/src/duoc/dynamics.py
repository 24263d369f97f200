"""Reversible maps, conditional evolutions, classical channels.

Reversible transformations are exactly the compositions of a
kind-preserving factor permutation with per-factor shifts ``X^j``
(``|s> -> |s + j mod d>``) and phases ``Z^j``
(``|s> -> omega^(s + j mod d) |s>``).  General dynamics arise as
conditional evolutions ``rho -> Tr_AC[(rho x sigma)(P x I)]``: an
ancilla is appended, an effect consumes the input and part of the
ancilla, and the unconsumed ancilla factors are the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .effects import Effect
from .errors import DomainError, NotClassicalError, ShapeError
from .linalg import embed_operator, is_unitary, partial_trace, tensor_all
from .states import DensityState, ValidityReport, validate_mixed_state
from .systems import (
    FactorPermutation,
    SystemSignature,
    embed_permutation,
    phase_matrix,
    shift_matrix,
)


@dataclass(eq=False)
class ReversibleSpec:
    """Factor permutation plus per-factor shift and phase exponents.

    An empty ``x_shifts`` or ``z_phases`` omits that layer entirely.
    This matters for the phase layer: ``Z^j = diag(omega^(s + j mod d))``
    is never the identity (the exponent ``j`` only moves a global
    phase), so ``z_phases=(0,) * k`` applies one phase flip per factor
    while ``z_phases=()`` applies none and ``ReversibleSpec()`` is the
    identity map.
    """

    perm: FactorPermutation = None
    x_shifts: tuple = ()
    z_phases: tuple = ()

    def __post_init__(self):
        self.x_shifts = tuple(int(x) for x in self.x_shifts)
        self.z_phases = tuple(int(x) for x in self.z_phases)


def build_reversible(spec: ReversibleSpec, sig: SystemSignature) -> np.ndarray:
    """Unitary for a reversible spec: permutation after shifts after phases."""
    nfac = sig.num_factors
    for name, layer in (("x_shifts", spec.x_shifts), ("z_phases", spec.z_phases)):
        if layer and len(layer) != nfac:
            raise DomainError(f"{name} must have length {nfac}, got {len(layer)}")
    perm = spec.perm or FactorPermutation.identity(sig.m, sig.n)
    if len(perm.sigma) != sig.m or len(perm.tau) != sig.n:
        raise DomainError("factor permutation shape does not match the signature")
    u = embed_permutation(sig, perm)
    if spec.x_shifts:
        u = u @ tensor_all(*[shift_matrix(sig.d, j) for j in spec.x_shifts])
    if spec.z_phases:
        u = u @ tensor_all(*[phase_matrix(sig.d, j) for j in spec.z_phases])
    return u


def apply_reversible(u: np.ndarray, rho: DensityState) -> DensityState:
    """Conjugate a state by a reversible unitary."""
    if not is_unitary(u):
        raise DomainError("transformation matrix is not unitary")
    if u.shape[0] != rho.sig.dim:
        raise ShapeError("unitary dimension does not match the state")
    return DensityState(rho.sig, u @ rho.matrix @ u.conj().T)


@dataclass(eq=False)
class ClassicalChannel:
    """Stochastic map between classical composites.

    ``matrix[y, x]`` is p(y|x) over basis strings; columns sum to one.
    """

    matrix: np.ndarray
    d: int
    m_in: int
    m_out: int

    def __post_init__(self):
        table = np.asarray(self.matrix, dtype=float)
        expect = (self.d**self.m_out, self.d**self.m_in)
        if table.shape != expect:
            raise ShapeError(f"channel table shape {table.shape} != {expect}")
        if np.min(table) < -1e-12:
            raise DomainError("conditional probabilities must be nonnegative")
        defect = float(np.max(np.abs(table.sum(axis=0) - 1.0)))
        if defect > 1e-10:
            raise DomainError(f"columns of p(y|x) must sum to 1 (defect {defect})")
        self.matrix = table

    def compose(self, inner: "ClassicalChannel") -> "ClassicalChannel":
        """Channel equal to ``inner`` followed by this one."""
        if inner.d != self.d or inner.m_out != self.m_in:
            raise DomainError("channel shapes do not compose")
        return ClassicalChannel(self.matrix @ inner.matrix, self.d, inner.m_in, self.m_out)


def classical_channel_map(ch: ClassicalChannel, rho: DensityState) -> DensityState:
    """Apply a classical channel to a diagonal classical state."""
    if not rho.sig.is_classical():
        raise NotClassicalError("channel input must live on a classical composite")
    if rho.sig.d != ch.d or rho.sig.m != ch.m_in:
        raise DomainError("channel does not match the input signature")
    off = float(np.max(np.abs(rho.matrix - np.diag(np.diag(rho.matrix)))))
    if off > 1e-10:
        raise NotClassicalError(f"input state is not diagonal (defect {off})")
    probs = np.real(np.diag(rho.matrix))
    out = ch.matrix @ probs
    return DensityState(SystemSignature(ch.d, ch.m_out, 0), np.diag(out.astype(complex)))


@dataclass(eq=False)
class ConditionalEvolutionSpec:
    """Wiring data for ``rho -> Tr_AC[(rho x sigma)(P x I)]``.

    Factors are numbered over the concatenation [input factors, ancilla
    factors].  ``effect_positions`` wires each factor of the effect to
    one concatenated position; the wiring must consume every input
    factor, and the unconsumed ancilla factors form the output.
    """

    input_sig: SystemSignature
    ancilla: DensityState
    effect: Effect
    effect_positions: tuple

    def __post_init__(self):
        self.effect_positions = tuple(int(p) for p in self.effect_positions)
        k_in = self.input_sig.num_factors
        k_all = k_in + self.ancilla.sig.num_factors
        pos = self.effect_positions
        if len(pos) != self.effect.sig.num_factors or len(set(pos)) != len(pos):
            raise DomainError(f"need {self.effect.sig.num_factors} distinct wiring positions")
        if any(p < 0 or p >= k_all for p in pos):
            raise DomainError(f"wiring positions {pos} outside the {k_all} available factors")
        if self.input_sig.d != self.ancilla.sig.d or self.input_sig.d != self.effect.sig.d:
            raise DomainError("local dimensions of input, ancilla and effect differ")
        if not set(range(k_in)) <= set(pos):
            raise DomainError("the effect must consume every input factor")
        concat_kinds = self.input_sig.kinds + self.ancilla.sig.kinds
        for t, p in enumerate(pos):
            if concat_kinds[p] != self.effect.sig.kinds[t]:
                raise DomainError(
                    f"effect factor {t} ({self.effect.sig.kinds[t]}) wired to a "
                    f"{concat_kinds[p]} factor"
                )
        if len(pos) >= k_all:
            raise DomainError("the wiring leaves no output factor")

    @property
    def output_positions(self) -> tuple:
        k_in = self.input_sig.num_factors
        k_all = k_in + self.ancilla.sig.num_factors
        return tuple(t for t in range(k_all) if t not in self.effect_positions)


def conditional_evolution(spec: ConditionalEvolutionSpec, rho: DensityState) -> tuple:
    """Apply a conditional evolution; returns ``(prob, out_state_or_None)``."""
    if rho.sig != spec.input_sig:
        raise DomainError(f"input on {rho.sig} does not match the spec's {spec.input_sig}")
    dims = rho.sig.dims + spec.ancilla.sig.dims
    joint = np.kron(rho.matrix, spec.ancilla.matrix)
    full = embed_operator(spec.effect.op, spec.effect_positions, dims)
    weighted = full @ joint
    prob = float(np.real(np.trace(weighted)))
    if prob <= 1e-12:
        return max(prob, 0.0), None
    keep = spec.output_positions
    out = partial_trace(weighted, dims, keep) / prob
    k_in = rho.sig.num_factors
    kinds = [spec.ancilla.sig.kinds[t - k_in] for t in keep]
    out_sig = SystemSignature(rho.sig.d, kinds.count("D"), kinds.count("A"))
    return prob, DensityState(out_sig, out)


def choi_matrix(map_fn, dim_in: int) -> np.ndarray:
    """Block matrix ``sum_ij map(E_ij) x E_ij`` deciding complete positivity."""
    dim_out = np.asarray(map_fn(_unit_matrix(dim_in, 0, 0))).shape[0]
    choi = np.zeros((dim_out * dim_in, dim_out * dim_in), dtype=complex)
    for i in range(dim_in):
        for j in range(dim_in):
            block = np.asarray(map_fn(_unit_matrix(dim_in, i, j)), dtype=complex)
            choi += np.kron(block, _unit_matrix(dim_in, i, j))
    return choi


def _unit_matrix(dim, i, j):
    e = np.zeros((dim, dim), dtype=complex)
    e[i, j] = 1.0
    return e


def validate_transformation(
    map_fn,
    sig_in: SystemSignature,
    sig_out: SystemSignature,
    samples: int = 25,
    seed: int = 0,
    atol: float = 1e-9,
) -> ValidityReport:
    """Sampled channel check: complete positivity, trace behavior, validity.

    Complete positivity is decided exactly (smallest eigenvalue of the
    induced block matrix above ``-atol``); trace non-increase and
    validity of the normalized outputs are checked on ``samples``
    random valid mixed states, so a passing report is flagged SAMPLED,
    not a proof.  Linearity itself is spot-checked.
    """
    from .oracle import random_mixed_state

    rng = np.random.default_rng(seed)
    a = np.asarray(map_fn(_unit_matrix(sig_in.dim, 0, 0)), dtype=complex)
    b = np.asarray(map_fn(1j * _unit_matrix(sig_in.dim, 0, 0)), dtype=complex)
    if float(np.max(np.abs(1j * a - b))) > 1e-9:
        raise DomainError("map is not linear over the complex operator space")
    choi = choi_matrix(map_fn, sig_in.dim)
    lo = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2)[0])
    if lo < -atol:
        return ValidityReport(False, -lo, witness="complete positivity", flags=("SAMPLED",))
    flags = ["SAMPLED"]
    worst = max(0.0, -lo)
    for _ in range(samples):
        state, _cert = random_mixed_state(sig_in, rng)
        image = np.asarray(map_fn(state.matrix), dtype=complex)
        tr = float(np.real(np.trace(image)))
        if tr > 1 + 1e-10:
            return ValidityReport(False, tr - 1.0, witness="trace increase", flags=("SAMPLED",))
        if tr <= 1e-12:
            continue
        rep = validate_mixed_state(DensityState(sig_out, image / tr))
        if rep.valid:
            worst = max(worst, rep.residual)
        elif "NON-EXHAUSTIVE" in rep.flags:
            # could not certify this sample either way; recorded, not fatal
            if "NON-EXHAUSTIVE" not in flags:
                flags.append("NON-EXHAUSTIVE")
        else:
            return ValidityReport(
                False, rep.residual, witness="invalid output state", flags=("SAMPLED",)
            )
    return ValidityReport(True, worst, witness="sampled channel check", flags=tuple(flags))

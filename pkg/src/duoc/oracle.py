"""Brute-force reference implementations.

Everything here recomputes results through its own index bookkeeping:
the conditional-state contraction is a direct einsum over digit axes,
the separable sweep uses the analytic Born values of the four product
basis states, and mixed-state membership for the d=2 pair is decided by
nonnegative least squares over a dense grid of valid pure projectors.
None of these routines call the engine's embedding or partial-trace
kernels, so agreement between the two paths is evidence, not tautology.

Randomness: ``numpy.random.default_rng`` (PCG64).  Every sampler draws
in a fixed documented order, so recorded values are stable across
platforms for a given seed.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .effects import Effect
from .errors import DomainError
from .states import PureStateSpec, build_pure_state, validate_pure_state
from .systems import FactorPermutation, SystemSignature

_L = string.ascii_letters


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def random_valid_state(sig: SystemSignature, rng) -> PureStateSpec:
    """Uniformly sampled valid pure-state spec.

    Draw order (fixed for reproducibility): dit permutation, anti-dit
    permutation, parity vector, tail, coefficient reals, coefficient
    imaginaries.
    """
    rng = _as_rng(rng)
    d, m, n = sig.d, sig.m, sig.n
    p = sig.num_pairs
    sigma = tuple(int(x) for x in rng.permutation(m))
    tau = tuple(int(x) for x in rng.permutation(n))
    parity = tuple(int(x) for x in rng.integers(0, d, size=p))
    tail = tuple(int(x) for x in rng.integers(0, d, size=abs(m - n)))
    raw = rng.normal(size=d**p) + 1j * rng.normal(size=d**p)
    raw = raw / np.linalg.norm(raw)
    coeffs = {}
    for idx in range(d**p):
        digits = []
        rem = idx
        for _ in range(p):
            digits.append(rem % d)
            rem //= d
        coeffs[tuple(reversed(digits))] = complex(raw[idx])
    return PureStateSpec(sig, coeffs, parity=parity, tail=tail,
                         perm=FactorPermutation(sigma, tau))


def random_certified_effect(sig: SystemSignature, rng, max_terms: int = 3) -> Effect:
    """Random positive combination of valid pure projectors, scaled below I.

    Draw order: number of terms, term weights, then one
    :func:`random_valid_state` per term.
    """
    rng = _as_rng(rng)
    n_terms = int(rng.integers(1, max_terms + 1))
    weights = rng.uniform(0.2, 1.0, size=n_terms)
    cert = []
    op = np.zeros((sig.dim, sig.dim), dtype=complex)
    for t in range(n_terms):
        spec = random_valid_state(sig, rng)
        v = build_pure_state(spec)
        cert.append([float(weights[t]), spec])
        op += weights[t] * np.outer(v, v.conj())
    top = float(np.linalg.eigvalsh((op + op.conj().T) / 2)[-1])
    if top > 1.0:
        scale = top * (1 + 1e-12)
        op /= scale
        cert = [[w / scale, spec] for w, spec in cert]
    return Effect(sig, op, certificate=[(w, spec) for w, spec in cert])


def random_mixed_state(sig: SystemSignature, rng, max_terms: int = 3):
    """Random convex mixture of valid pure states; returns (state, certificate)."""
    from .states import DensityState

    rng = _as_rng(rng)
    n_terms = int(rng.integers(1, max_terms + 1))
    weights = rng.dirichlet(np.ones(n_terms))
    cert = []
    mat = np.zeros((sig.dim, sig.dim), dtype=complex)
    for t in range(n_terms):
        spec = random_valid_state(sig, rng)
        v = build_pure_state(spec)
        cert.append((float(weights[t]), spec))
        mat += weights[t] * np.outer(v, v.conj())
    return DensityState(sig, mat), cert


def oracle_conditional(rho: np.ndarray, d: int, nfac: int, e_op: np.ndarray, positions):
    """Direct-index contraction of ``Tr_S[(E_S x I) rho]``.

    Independent of the engine's embed/partial-trace path: the whole
    contraction is one einsum over per-factor digit axes.
    Returns ``(prob, unnormalized_out)``.
    """
    positions = tuple(int(p) for p in positions)
    k = len(positions)
    if len(set(positions)) != k or not all(0 <= p < nfac for p in positions):
        raise DomainError(f"positions {positions} invalid for {nfac} factors")
    rest = [t for t in range(nfac) if t not in positions]
    rho_t = np.asarray(rho, dtype=complex).reshape((d,) * (2 * nfac))
    e_t = np.asarray(e_op, dtype=complex).reshape((d,) * (2 * k))
    # out[u, v] = sum_{s, c} E[s, c] rho[(c at S, u at rest), (s at S, v at rest)]
    s_lab = {p: _L[i] for i, p in enumerate(positions)}
    c_lab = {p: _L[k + i] for i, p in enumerate(positions)}
    u_lab = {t: _L[2 * k + i] for i, t in enumerate(rest)}
    v_lab = {t: _L[2 * k + len(rest) + i] for i, t in enumerate(rest)}
    e_axes = "".join(s_lab[p] for p in positions) + "".join(c_lab[p] for p in positions)
    row = "".join(c_lab[t] if t in s_lab else u_lab[t] for t in range(nfac))
    col = "".join(s_lab[t] if t in s_lab else v_lab[t] for t in range(nfac))
    out_axes = "".join(u_lab[t] for t in rest) + "".join(v_lab[t] for t in rest)
    out = np.einsum(e_axes + "," + row + col + "->" + out_axes, e_t, rho_t)
    rest_dim = d ** len(rest)
    out = out.reshape(rest_dim, rest_dim)
    return float(np.real(np.trace(out))), out


def _branch_vector(e_vec: np.ndarray, psi: np.ndarray, d: int, nfac: int, positions):
    """Partial inner product <e|psi> over the measured factors."""
    positions = tuple(positions)
    rest = [t for t in range(nfac) if t not in positions]
    psi_t = psi.reshape((d,) * nfac)
    e_t = e_vec.conj().reshape((d,) * len(positions))
    lab = {p: _L[i] for i, p in enumerate(positions)}
    out_lab = {t: _L[len(positions) + i] for i, t in enumerate(rest)}
    psi_axes = "".join(lab[t] if t in lab else out_lab[t] for t in range(nfac))
    spec = "".join(lab[p] for p in positions) + "," + psi_axes + "->" + "".join(
        out_lab[t] for t in rest
    )
    return np.einsum(spec, e_t, psi_t).reshape(-1)


def _corrupt_case(sig: SystemSignature):
    """A maximally correlated state plus a digit-mixing effect.

    Measuring the first dit in a superposition basis leaves its paired
    anti-dit in a superposition of basis states, which the model
    forbids, so the conditional state always fails validation.
    """
    d, m, n = sig.d, sig.m, sig.n
    if min(m, n) < 1:
        raise DomainError("the corrupt control needs at least one dit/anti-dit pair")
    p = sig.num_pairs
    amp = d ** (-p / 2)
    coeffs = {}
    for idx in range(d**p):
        digits = []
        rem = idx
        for _ in range(p):
            digits.append(rem % d)
            rem //= d
        coeffs[tuple(reversed(digits))] = amp
    state = PureStateSpec(sig, coeffs, parity=(0,) * p, tail=(0,) * abs(m - n))
    e = np.zeros(d, dtype=complex)
    e[0] = 1 / np.sqrt(2)
    e[1] = 1 / np.sqrt(2)
    return state, e, (0,)


def brute_force_conditional_check(trials: int, sig: SystemSignature, rng,
                                  corrupt: bool = False) -> int:
    """Count invalid conditional states over random measurement scenarios.

    Each trial samples a valid pure state, a certified random effect on
    a random proper sub-factor set, contracts with
    :func:`oracle_conditional`, and validates every branch of the
    conditional state (branches below relative weight 1e-9 are
    ignored).  With ``corrupt=True`` the effect is replaced by a
    deliberately invalid parity-mixing projector, so failures are the
    expected outcome.
    """
    rng = _as_rng(rng)
    d, nfac = sig.d, sig.num_factors
    if nfac < 2:
        raise DomainError("need at least two factors to measure a proper subset")
    failures = 0
    for _ in range(trials):
        if corrupt:
            spec, e_vec, positions = _corrupt_case(sig)
            branches = [(1.0, e_vec)]
        else:
            spec = random_valid_state(sig, rng)
            size = int(rng.integers(1, nfac))
            positions = tuple(sorted(int(x) for x in rng.choice(nfac, size=size,
                                                                replace=False)))
            sub = sig.sub_signature(positions)
            effect = random_certified_effect(sub, rng)
            branches = [(w, build_pure_state(s)) for w, s in effect.certificate]
        psi = build_pure_state(spec)
        rho = np.outer(psi, psi.conj())
        e_op = sum(w * np.outer(e, e.conj()) for w, e in branches)
        prob, raw_out = oracle_conditional(rho, d, nfac, e_op, positions)
        if prob <= 1e-9:
            continue
        rest = tuple(t for t in range(nfac) if t not in positions)
        kinds = [sig.kinds[t] for t in rest]
        out_sig = SystemSignature(d, kinds.count("D"), kinds.count("A"))
        recon = np.zeros_like(raw_out)
        ok = True
        for w, e_vec in branches:
            branch = _branch_vector(e_vec, psi, d, nfac, positions)
            mass = float(w * np.linalg.norm(branch) ** 2)
            recon += w * np.outer(branch, branch.conj())
            if mass / prob <= 1e-9:
                continue
            rep = validate_pure_state(branch / np.linalg.norm(branch), out_sig)
            if not rep.valid:
                ok = False
        # the branch decomposition must rebuild the contraction exactly
        if float(np.max(np.abs(recon - raw_out))) > 1e-10:
            ok = False
        if not ok:
            failures += 1
    return failures


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over weight parameters."""

    step: float
    ranges: tuple = None

    def __post_init__(self):
        if not 0 < self.step <= 1:
            raise DomainError(f"grid step must lie in (0, 1], got {self.step}")


def separable_grid_min(p: float, grid) -> float:
    """Exhaustive witness-outcome minimum over gridded separable states.

    Uses the analytic Born values of the four product basis states
    (p(no| |ij><ij|) = 1 - p*[ij=00] - (1-p)*[ij=11]) rather than any
    engine code, and sweeps integer compositions of the simplex.
    """
    if not 0 < p < 1:
        raise DomainError(f"witness parameter must lie in (0, 1), got {p}")
    step = grid.step if isinstance(grid, GridSpec) else float(grid)
    steps = int(round(1.0 / step))
    no_value = {
        (0, 0): 1.0 - p,
        (0, 1): 1.0,
        (1, 0): 1.0,
        (1, 1): p,
    }
    best = None
    for a in range(steps + 1):
        for b in range(steps + 1 - a):
            for c in range(steps + 1 - a - b):
                e = steps - a - b - c
                val = (
                    a * no_value[(0, 0)]
                    + b * no_value[(0, 1)]
                    + c * no_value[(1, 0)]
                    + e * no_value[(1, 1)]
                ) / steps
                if best is None or val < best:
                    best = val
    return float(best)


def _pair_atoms(d: int, n_angles: int, n_phases: int):
    """Grid of valid pure projectors of the (1, 1) pair, flattened."""
    atoms = []
    for k in range(d):
        basis = []
        for i in range(d):
            v = np.zeros(d * d, dtype=complex)
            v[i * d + (i + k) % d] = 1.0
            basis.append(v)
        for i in range(d):
            atoms.append(np.outer(basis[i], basis[i].conj()))
        for i in range(d):
            for j in range(i + 1, d):
                for a in range(n_angles + 1):
                    phi = 0.5 * np.pi * a / n_angles
                    for q in range(n_phases):
                        chi = 2 * np.pi * q / n_phases
                        v = np.cos(phi) * basis[i] + np.sin(phi) * np.exp(1j * chi) * basis[j]
                        atoms.append(np.outer(v, v.conj()))
    return atoms


def brute_force_mixed_membership(rho: np.ndarray, d: int = 2,
                                 n_angles: int = 48, n_phases: int = 16) -> float:
    """Convex-decomposition residual of a (1, 1) density matrix.

    Solves a nonnegative least-squares fit of ``rho`` against a dense
    grid of valid pure projectors; small residuals certify membership
    in the model's mixed-state set, large residuals witness exclusion.
    """
    rho = np.asarray(rho, dtype=complex)
    atoms = _pair_atoms(d, n_angles, n_phases)
    a_mat = np.array([np.concatenate([a.reshape(-1).real, a.reshape(-1).imag])
                      for a in atoms]).T
    b = np.concatenate([rho.reshape(-1).real, rho.reshape(-1).imag])
    _, residual = nnls(a_mat, b)
    return float(residual)

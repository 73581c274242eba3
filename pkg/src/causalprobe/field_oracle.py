"""Independent truncated-Fock oracle for the lattice field results.

Represents every lattice mode as an explicit truncated oscillator ladder,
builds the kicked vacuum as a kron product of coherent vectors, applies the
measurement exactly as a projector family on the joint space, and reads
observables off dense matrices.  Nothing here reuses the closed forms in
``fieldtheory``; agreement between the two is a test, not an assumption.

Joint dimension is trunc^(number of modes); keep it at desk scale
(<= ~1e5, e.g. d=1, N=4, trunc 6 -> 1296).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Operator,
    StateVector,
    embed_local,
    post_measurement_expectation,
    qndsv_scheme,
)
from .fieldtheory import KickSpec, kick_displacements, qndsv_phi2_y
from .lattice import ModeSet
from .oscillators import coherent_amplitudes, ladder
from .policy import DEFAULT_POLICY, NumericPolicy, TruncationError

_MAX_ORACLE_DIM = 200_000


def oracle_dims(modes: ModeSet, trunc: int) -> tuple[int, ...]:
    dims = (int(trunc),) * modes.n_modes
    total = int(np.prod(dims))
    if total > _MAX_ORACLE_DIM:
        raise ValueError(
            f"oracle dimension {total} exceeds the desk-scale cap {_MAX_ORACLE_DIM}")
    return dims


def oracle_prestate(modes: ModeSet, kick: KickSpec, trunc: int,
                    policy: NumericPolicy = DEFAULT_POLICY) -> tuple[StateVector, float]:
    """Kicked vacuum as a product of per-mode truncated coherent vectors."""
    dims = oracle_dims(modes, trunc)
    alphas = kick_displacements(modes, kick)
    amp = np.array([1.0], dtype=complex)
    for a in alphas:
        amp = np.kron(amp, coherent_amplitudes(a, trunc))
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amp) ** 2)))
    if tail > policy.tail_tol:
        raise TruncationError(
            f"per-mode truncation {trunc} leaves tail {tail:.3e} > {policy.tail_tol:.0e}")
    return StateVector(dims, amp), tail


def _mode_term(modes: ModeSet, index: int, y, trunc: int, weight: float,
               momentum: bool) -> np.ndarray:
    a = ladder(trunc)
    phase = np.exp(1j * modes.phase_at(index, y))
    if momentum:
        return -1j * weight * (phase * a - np.conj(phase) * a.conj().T)
    return weight * (phase * a + np.conj(phase) * a.conj().T)


def field_operator(modes: ModeSet, y, trunc: int) -> Operator:
    """phi_y = sum_k sqrt(hbar/2 omega_k V)(e^{ik.y} b_k + h.c.)."""
    lat = modes.lattice
    dims = oracle_dims(modes, trunc)
    total = np.zeros((int(np.prod(dims)), int(np.prod(dims))), dtype=complex)
    for i in range(modes.n_modes):
        w = np.sqrt(lat.hbar / (2.0 * modes.omega[i] * lat.volume))
        term = Operator((trunc,), _mode_term(modes, i, y, trunc, w, momentum=False),
                        hermitian=True)
        total += embed_local(term, i, dims).matrix
    return Operator(dims, total, hermitian=True)


def momentum_operator(modes: ModeSet, y, trunc: int) -> Operator:
    """pi_y = -i sum_k sqrt(hbar omega_k / 2V)(e^{ik.y} b_k - h.c.)."""
    lat = modes.lattice
    dims = oracle_dims(modes, trunc)
    total = np.zeros((int(np.prod(dims)), int(np.prod(dims))), dtype=complex)
    for i in range(modes.n_modes):
        w = np.sqrt(lat.hbar * modes.omega[i] / (2.0 * lat.volume))
        term = Operator((trunc,), _mode_term(modes, i, y, trunc, w, momentum=True),
                        hermitian=True)
        total += embed_local(term, i, dims).matrix
    return Operator(dims, total, hermitian=True)


def one_particle_state(modes: ModeSet, p_index: int, trunc: int) -> StateVector:
    """b_p^dag |0>: single excitation in mode p, vacuum elsewhere."""
    dims = oracle_dims(modes, trunc)
    index = [0] * modes.n_modes
    index[p_index] = 1
    return StateVector.basis_state(dims, tuple(index))


def one_particle_packet_state(modes: ModeSet, packet, t1: float,
                              trunc: int) -> StateVector:
    """One-particle state of a wave packet: sum_k w_k b_k^dag |0> with
    w_k = sqrt(eps) packet_k e^{-i omega_k t1} (unit norm by the packet
    normalization convention)."""
    packet.validate(modes)
    dims = oracle_dims(modes, trunc)
    weights = (np.sqrt(modes.eps) * packet.spectral
               * np.exp(-1j * modes.omega * t1))
    amp = np.zeros(int(np.prod(dims)), dtype=complex)
    for i, w in enumerate(weights):
        if w == 0:
            continue
        index = [0] * modes.n_modes
        index[i] = 1
        flat = int(np.ravel_multi_index(tuple(index), dims))
        amp[flat] = w
    return StateVector(dims, amp)


def _square(op: Operator) -> Operator:
    return Operator(op.dims, op.matrix @ op.matrix, hermitian=True)


def _naive_expectation(state: StateVector, obs: Operator, mode_a: int,
                       mode_b: int) -> float:
    """sum_{m,n} <psi|P_mn O P_mn|psi> with P_mn the joint number projector
    on the two pair modes (identity elsewhere), applied as an index mask.

    Same semantics as a Lueders projector family through the generic
    machinery; kept mask-based so no joint-space projector matrices are
    ever materialized.
    """
    dims = state.dims
    tensor = state.amplitudes.reshape(dims)
    total = 0.0
    for m in range(dims[mode_a]):
        for n in range(dims[mode_b]):
            sel = [slice(None)] * len(dims)
            sel[mode_a], sel[mode_b] = m, n
            branch = np.zeros_like(tensor)
            branch[tuple(sel)] = tensor[tuple(sel)]
            flat = branch.reshape(-1)
            total += float(np.real(np.vdot(flat, obs.matrix @ flat)))
    return total


def naive_outcome_probabilities(modes: ModeSet, kick: KickSpec, p_index: int,
                                trunc: int,
                                policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """P_mn table for the naive pair measurement (Poisson products)."""
    state, _ = oracle_prestate(modes, kick, trunc, policy)
    q_index = int(modes.conjugate_index[p_index])
    tensor = np.abs(state.amplitudes.reshape(state.dims)) ** 2
    axes = tuple(i for i in range(modes.n_modes) if i not in (p_index, q_index))
    probs = tensor.sum(axis=axes)
    return probs if p_index < q_index else probs.T


@dataclass(frozen=True)
class OracleReport:
    """Oracle expectation values before and after the measurement."""

    scheme_kind: str
    values: dict
    prestate_values: dict
    tail_bound: float
    p_yes: float | None = None


def numeric_oracle_qndsv(modes: ModeSet, kick: KickSpec, y, p_index: int,
                         trunc: int, scheme_kind: str = "qndsv",
                         observables=("phi_y", "pi_y", "phi2_y", "pi2_y"),
                         policy: NumericPolicy = DEFAULT_POLICY) -> OracleReport:
    """Exact truncated-Fock evaluation of Bob's local moments at y.

    scheme_kind "qndsv": two-outcome verification of the one-particle state
    of mode p.  scheme_kind "naive": collapse of the +-p pair onto joint
    number states.
    """
    if not modes.is_paired(p_index):
        raise ValueError(f"mode {p_index} is self-conjugate")
    state, tail = oracle_prestate(modes, kick, trunc, policy)
    ops = {}
    phi = field_operator(modes, y, trunc)
    pi = momentum_operator(modes, y, trunc)
    for name in observables:
        if name == "phi_y":
            ops[name] = phi
        elif name == "pi_y":
            ops[name] = pi
        elif name == "phi2_y":
            ops[name] = _square(phi)
        elif name == "pi2_y":
            ops[name] = _square(pi)
        else:
            raise ValueError(f"unknown field observable {name!r}")

    pre = {name: float(op.expectation(state)) for name, op in ops.items()}

    p_yes = None
    if scheme_kind == "qndsv":
        target = one_particle_state(modes, p_index, trunc)
        scheme = qndsv_scheme(target)
        p_yes = float(abs(target.overlap(state)) ** 2)
        post = {name: post_measurement_expectation(state, scheme, op, policy)
                for name, op in ops.items()}
    elif scheme_kind == "naive":
        q_index = int(modes.conjugate_index[p_index])
        post = {name: _naive_expectation(state, op, p_index, q_index)
                for name, op in ops.items()}
    else:
        raise ValueError(f"unknown scheme kind {scheme_kind!r}")
    return OracleReport(scheme_kind=scheme_kind, values=post, prestate_values=pre,
                        tail_bound=tail, p_yes=p_yes)


def oracle_qndsv_packet_phi_y(modes: ModeSet, kick: KickSpec, y, packet,
                              t1: float, trunc: int,
                              policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """<phi_y> after verifying the one-particle state of a wave packet,
    exact on the truncated joint space."""
    state, _ = oracle_prestate(modes, kick, trunc, policy)
    target = one_particle_packet_state(modes, packet, t1, trunc)
    scheme = qndsv_scheme(target)
    phi = field_operator(modes, y, trunc)
    return post_measurement_expectation(state, scheme, phi, policy)


@dataclass(frozen=True)
class Phi2Comparison:
    """Side-by-side <phi_y^2> after the single-mode verification.

    The closed-form candidate and the oracle disagree systematically
    (already at lam = 0); both numbers are reported, neither is adopted.
    """

    closed_form: float
    oracle: float
    difference: float
    tail_bound: float


def phi2_comparison(modes: ModeSet, kick: KickSpec, y, p_index: int, trunc: int,
                    policy: NumericPolicy = DEFAULT_POLICY) -> Phi2Comparison:
    closed = qndsv_phi2_y(modes, kick, y, p_index)
    report = numeric_oracle_qndsv(modes, kick, y, p_index, trunc,
                                  scheme_kind="qndsv", observables=("phi2_y",),
                                  policy=policy)
    oracle = report.values["phi2_y"]
    return Phi2Comparison(closed_form=closed, oracle=oracle,
                          difference=closed - oracle, tail_bound=report.tail_bound)

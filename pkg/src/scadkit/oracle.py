"""Exact small-system quantum oracle for the distillation security analysis.

Dense statevectors over named qubit registers (qubit 0 is the most
significant index bit): GHZ blocks, collective-attack purifications with
an explicit orthonormal adversary basis, the delayed-measurement parity
circuit, and exact von Neumann entropies of the acceptance-conditioned
states.  Correctness oracle, not a performance artifact: everything is
dense and capped at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .bits import BitPattern, binary_entropy
from .keyrate import CadMask, DegenerateAcceptanceError
from .noise import ErrorDistribution

_NORM_TOL = 1e-12
_TRACE_TOL = 1e-10
_PSD_SLACK = 1e-10
_EIG_FLOOR = 1e-14

Registers = dict[str, tuple[int, ...]]


def _check_registers(registers: Registers, n_qubits: int) -> None:
    seen: list[int] = []
    for name, qubits in registers.items():
        if not qubits:
            raise ValueError(f"register {name!r} is empty")
        seen.extend(qubits)
    if sorted(seen) != list(range(n_qubits)):
        raise ValueError("registers must partition the qubit range exactly")


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized statevector with a name -> qubit-indices register map."""

    amps: np.ndarray
    registers: Registers

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=complex)
        n = amps.size.bit_length() - 1
        if amps.ndim != 1 or amps.size != 1 << n:
            raise ValueError("amplitude array length must be a power of two")
        norm = float(np.real(np.vdot(amps, amps)))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"squared norm {norm} is not 1")
        _check_registers(self.registers, n)
        object.__setattr__(self, "amps", amps)

    @property
    def n_qubits(self) -> int:
        return self.amps.size.bit_length() - 1

    def qubit(self, name: str, k: int = 0) -> int:
        return self.registers[name][k]


@dataclass(frozen=True, eq=False)
class DensityState:
    """Hermitian, unit-trace, PSD matrix with a register map."""

    matrix: np.ndarray
    registers: Registers

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        n = m.shape[0].bit_length() - 1
        if m.ndim != 2 or m.shape != (1 << n, 1 << n):
            raise ValueError("density matrix must be square with power-of-two size")
        if abs(float(np.real(np.trace(m))) - 1.0) > _TRACE_TOL:
            raise ValueError(f"trace {np.trace(m)} is not 1")
        if float(np.max(np.abs(m - m.conj().T))) > _TRACE_TOL:
            raise ValueError("matrix is not Hermitian")
        if float(np.linalg.eigvalsh(m).min()) < -_PSD_SLACK:
            raise ValueError("matrix is not positive semidefinite")
        _check_registers(self.registers, n)
        object.__setattr__(self, "matrix", m)

    @property
    def n_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1


@dataclass(frozen=True, eq=False)
class AttackState:
    """Collective attack: nonnegative GHZ-diagonal weights lambda[x, y]."""

    p: int
    lambdas: np.ndarray

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.shape != (1 << self.p, 2):
            raise ValueError(f"expected shape ({1 << self.p}, 2), got {lam.shape}")
        if float(lam.min()) < -1e-12:
            raise ValueError("negative attack weight")
        lam = np.maximum(lam, 0.0)
        total = float(lam.sum())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"attack weights sum to {total}, not 1")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    def error_distribution(self) -> ErrorDistribution:
        """The observations this attack induces: Q_x = lambda_x^0 + lambda_x^1, Q_X = sum lambda_x^1."""
        return ErrorDistribution(
            p=self.p,
            probs=self.lambdas.sum(axis=1),
            qx=float(self.lambdas[:, 1].sum()),
        )

    @classmethod
    def random(cls, p: int, rng: np.random.Generator, peak: float = 1.0) -> "AttackState":
        """Dirichlet-distributed weights; peak > 1 biases toward the quiet pattern."""
        alpha = np.ones(1 << (p + 1))
        alpha[0] = peak
        return cls(p, rng.dirichlet(alpha).reshape(1 << p, 2))


def ghz_state(x: BitPattern, y: int) -> PureState:
    """(|0, x> + (-1)^y |1, ~x>)/sqrt(2) on 1 + width qubits (leader first)."""
    w = x.width
    amps = np.zeros(1 << (w + 1), dtype=complex)
    amps[x.value] = 1.0 / math.sqrt(2.0)
    amps[(1 << w) | x.complement().value] = (-1.0) ** (y & 1) / math.sqrt(2.0)
    return PureState(amps, {"a": (0,), "b": tuple(range(1, w + 1))})


def _ghz_vector(x_value: int, y: int, width: int) -> np.ndarray:
    amps = np.zeros(1 << (width + 1), dtype=complex)
    amps[x_value] = 1.0 / math.sqrt(2.0)
    amps[(1 << width) | (x_value ^ ((1 << width) - 1))] = (-1.0) ** (y & 1) / math.sqrt(2.0)
    return amps


def _attack_matrix(a: AttackState) -> np.ndarray:
    """Columns index the orthonormal adversary basis e_(x,y) = 2x + y."""
    dim = 1 << (a.p + 1)
    w = np.zeros((dim, dim), dtype=complex)
    for x in range(1 << a.p):
        for y in (0, 1):
            lam = a.lambdas[x, y]
            if lam > 0.0:
                w[:, (x << 1) | y] = math.sqrt(lam) * _ghz_vector(x, y, a.p)
    return w


def attack_state(a: AttackState) -> PureState:
    """Purification sum_(x,y) sqrt(lambda) |g(x;y)> |e_(x,y)> on A, B, E."""
    w = _attack_matrix(a)
    p = a.p
    return PureState(
        w.reshape(-1),
        {
            "a": (0,),
            "b": tuple(range(1, p + 1)),
            "e": tuple(range(p + 1, 2 * p + 2)),
        },
    )


def _bit_of(idx: np.ndarray, qubit: int, n: int) -> np.ndarray:
    return (idx >> (n - 1 - qubit)) & 1


def cnot(state: PureState, control: int, target: int) -> PureState:
    if control == target:
        raise ValueError("control and target collide")
    n = state.n_qubits
    idx = np.arange(state.amps.size)
    flip = _bit_of(idx, control, n)
    src = idx ^ (flip << (n - 1 - target))
    return PureState(state.amps[src], state.registers)


def dcnot(state: PureState, c1: int, c2: int, target: int) -> PureState:
    """Double-control NOT: |x, y, z> -> |x, y, z ^ x ^ y> (two CNOTs)."""
    if len({c1, c2, target}) != 3:
        raise ValueError(f"qubit labels collide: {c1}, {c2}, {target}")
    n = state.n_qubits
    idx = np.arange(state.amps.size)
    parity = _bit_of(idx, c1, n) ^ _bit_of(idx, c2, n)
    src = idx ^ (parity << (n - 1 - target))
    return PureState(state.amps[src], state.registers)


def _require_zero(state: PureState, name: str) -> None:
    n = state.n_qubits
    nz = np.flatnonzero(np.abs(state.amps) > 0.0)
    for qubit in state.registers[name]:
        if np.any(_bit_of(nz, qubit, n)):
            raise ValueError(f"register {name!r} must start in |0...0>")


def delayed_cad_circuit(state: PureState, mask: CadMask) -> PureState:
    """Coherent parity checks of one two-round block.

    Alice's DCNOT writes her Left/Right parity into m; every CAD-enabled
    Bob DCNOTs his own parity into his rej qubit and then CNOTs m onto it,
    so rej holds (x ^ z) AND mask after the dust settles.  Registers
    "left" and "right" are the two GHZ blocks (Alice's qubit first), "m"
    one message qubit and "rej" one qubit per Bob, both starting at zero;
    any other registers ride along untouched.
    """
    p = mask.width
    for name, size in (("left", p + 1), ("right", p + 1), ("m", 1), ("rej", p)):
        if name not in state.registers:
            raise ValueError(f"missing register {name!r}")
        if len(state.registers[name]) != size:
            raise ValueError(f"register {name!r} must have {size} qubits")
    _require_zero(state, "m")
    _require_zero(state, "rej")
    out = dcnot(state, state.qubit("left", 0), state.qubit("right", 0), state.qubit("m"))
    for j in range(1, p + 1):
        if not mask.is_on(j):
            continue
        rej_j = state.registers["rej"][j - 1]
        out = dcnot(out, state.qubit("left", j), state.qubit("right", j), rej_j)
        out = cnot(out, state.qubit("m"), rej_j)
    return out


def paired_attack_state(a: AttackState) -> PureState:
    """Two attack copies plus fresh message and reject ancillas.

    Register order: left (p+1), right (p+1), m (1), rej (p), eve1 (p+1),
    eve2 (p+1), with the left/right copies carrying their own adversary
    registers eve1/eve2.
    """
    p = a.p
    w = _attack_matrix(a)
    dim = 1 << (p + 1)
    block = np.einsum("le,rf->lref", w, w)
    full = np.zeros((dim, dim, 2, 1 << p, dim, dim), dtype=complex)
    full[:, :, 0, 0, :, :] = block
    q = p + 1
    registers = {
        "left": tuple(range(0, q)),
        "right": tuple(range(q, 2 * q)),
        "m": (2 * q,),
        "rej": tuple(range(2 * q + 1, 2 * q + 1 + p)),
        "eve1": tuple(range(3 * q, 4 * q)),
        "eve2": tuple(range(4 * q, 5 * q)),
    }
    return PureState(full.reshape(-1), registers)


def conditioned_rho_aem(a: AttackState, mask: CadMask) -> tuple[DensityState, float]:
    """Exact accepted-state density operator over A, E, M and the acceptance probability.

    Runs the delayed-measurement circuit on two attack copies, projects
    every reject qubit onto zero, measures Alice's Left qubit and the
    message qubit (decohering them), and discards the Bobs and Alice's
    Right qubit.
    """
    p = a.p
    if p > 3:
        raise ValueError("exact oracle is capped at p <= 3")
    if mask.width != p:
        raise ValueError(f"mask width {mask.width} does not match party count {p}")
    state = delayed_cad_circuit(paired_attack_state(a), mask)
    dim = 1 << (p + 1)
    arr = state.amps.reshape(dim, dim, 2, 1 << p, dim, dim)
    kept = arr[:, :, :, 0, :, :]
    p_acc = float(np.sum(np.abs(kept) ** 2))
    if p_acc <= 1e-300:
        raise DegenerateAcceptanceError("no amplitude survives the reject projection")
    kept = kept / math.sqrt(p_acc)

    # axes: (a_left, bobs_left, a_right, bobs_right, m, eve1, eve2)
    kept = kept.reshape(2, 1 << p, 2, 1 << p, 2, dim, dim)
    # keep (a_left, m, eve1, eve2); discard (bobs_left, a_right, bobs_right)
    kept = np.moveaxis(kept, (0, 4, 5, 6, 1, 2, 3), (0, 1, 2, 3, 4, 5, 6))
    e_dim = dim * dim
    d_dim = (1 << p) * 2 * (1 << p)
    blocks = kept.reshape(2, 2, e_dim, d_dim)

    rho = np.zeros((2 * e_dim * 2, 2 * e_dim * 2), dtype=complex)
    for a_val in (0, 1):
        for m_val in (0, 1):
            v = blocks[a_val, m_val]
            block = v @ v.conj().T
            rows = a_val * (2 * e_dim) + 2 * np.arange(e_dim) + m_val
            rho[np.ix_(rows, rows)] += block
    q = p + 1
    registers = {
        "a": (0,),
        "eve": tuple(range(1, 2 * q + 1)),
        "m": (2 * q + 1,),
    }
    return DensityState(rho, registers), p_acc


def _resolve(names: Union[str, Iterable[str]]) -> tuple[str, ...]:
    if isinstance(names, str):
        return (names,)
    return tuple(names)


def partial_trace(rho: DensityState, keep: Union[str, Iterable[str]]) -> DensityState:
    """Reduced state over the named registers (kept in global qubit order)."""
    keep_names = _resolve(keep)
    for name in keep_names:
        if name not in rho.registers:
            raise ValueError(f"unknown register {name!r}")
    n = rho.n_qubits
    keep_qubits = sorted(q for name in keep_names for q in rho.registers[name])
    tensor = rho.matrix.reshape([2] * (2 * n))
    row_subs = list(range(n))
    col_subs = [n + q if q in keep_qubits else q for q in range(n)]
    out_subs = [q for q in keep_qubits] + [n + q for q in keep_qubits]
    reduced = np.einsum(tensor, row_subs + col_subs, out_subs)
    k = len(keep_qubits)
    renumber = {q: i for i, q in enumerate(keep_qubits)}
    registers = {
        name: tuple(renumber[q] for q in rho.registers[name]) for name in keep_names
    }
    return DensityState(reduced.reshape(1 << k, 1 << k), registers)


def vn_entropy(matrix: np.ndarray) -> float:
    """Von Neumann entropy in bits; eigenvalues below 1e-14 count as zero."""
    eig = np.linalg.eigvalsh(matrix)
    eig = eig[eig > _EIG_FLOOR]
    return float(-(eig @ np.log2(eig)))


def conditional_entropy(
    rho: DensityState,
    target: Union[str, Iterable[str]],
    side: Union[str, Iterable[str]],
) -> float:
    """H(target | side) = H(target, side) - H(side), in bits."""
    target_names = _resolve(target)
    side_names = _resolve(side)
    if set(target_names) & set(side_names):
        raise ValueError("target and side registers overlap")
    joint = partial_trace(rho, target_names + side_names)
    h_joint = vn_entropy(joint.matrix)
    if not side_names:
        return h_joint
    h_side = vn_entropy(partial_trace(rho, side_names).matrix)
    return h_joint - h_side


def project_register(rho: DensityState, name: str, value: int) -> tuple[DensityState, float]:
    """Condition on a computational-basis outcome of one register.

    Returns the renormalized post-measurement state with that register
    removed, and the outcome probability.
    """
    if name not in rho.registers:
        raise ValueError(f"unknown register {name!r}")
    n = rho.n_qubits
    qubits = rho.registers[name]
    idx = np.arange(1 << n)
    sel = np.ones(idx.size, dtype=bool)
    for k, qubit in enumerate(qubits):
        want = (value >> (len(qubits) - 1 - k)) & 1
        sel &= _bit_of(idx, qubit, n) == want
    picked = np.flatnonzero(sel)
    sub = rho.matrix[np.ix_(picked, picked)]
    prob = float(np.real(np.trace(sub)))
    if prob <= 1e-300:
        raise ValueError(f"outcome {value} of register {name!r} has zero probability")
    keep_qubits = [q for q in range(n) if q not in qubits]
    renumber = {q: i for i, q in enumerate(keep_qubits)}
    registers = {
        other: tuple(renumber[q] for q in qs)
        for other, qs in rho.registers.items()
        if other != name
    }
    return DensityState(sub / prob, registers), prob


def theorem1_bound(pairs, m_norm: float) -> float:
    """Entropy lower bound from pairwise norms and real overlaps.

    Each entry is (n0, n1, re): the squared norms of the two conditional
    adversary vectors and the real part of their overlap.  Pairs with a
    vanishing norm contribute zero.
    """
    pairs = list(pairs)
    total = 0.0
    norm_sum = 0.0
    for n0, n1, re in pairs:
        if n0 < -1e-12 or n1 < -1e-12:
            raise ValueError("negative squared norm")
        n0, n1 = max(float(n0), 0.0), max(float(n1), 0.0)
        if abs(re) > math.sqrt(n0 * n1) * (1.0 + 1e-9) + 1e-15:
            raise ValueError(f"overlap {re} violates Cauchy-Schwarz for norms {n0}, {n1}")
        norm_sum += n0 + n1
        if n0 <= 0.0 or n1 <= 0.0:
            continue
        s = n0 + n1
        nu = 0.5 + math.sqrt((n0 - n1) ** 2 + 4.0 * re * re) / (2.0 * s)
        nu = min(nu, 1.0)
        total += (s / m_norm) * (binary_entropy(n0 / s) - binary_entropy(nu))
    if abs(norm_sum - m_norm) > 1e-10 * max(1.0, abs(m_norm)):
        raise ValueError(f"norms sum to {norm_sum}, expected {m_norm}")
    return total

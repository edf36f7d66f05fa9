import itertools
import math

import numpy as np
import pytest

from ghz_helpers import basis_input, closed_form, two_block_registers
from scadkit import oracle as oc
from scadkit.bits import BitPattern
from scadkit.keyrate import CadMask, NuVector, entropy_bound, entropy_objective, p_accept
from scadkit.noise import distribution_from_scenario, NoiseScenario


def test_ghz_state_paper_example():
    # three Bobs: g(101; 1) = (|0101> - |1010>)/sqrt(2)
    g = oc.ghz_state(BitPattern.from_string("101"), 1)
    expected = np.zeros(16, dtype=complex)
    expected[0b0101] = 1 / math.sqrt(2)
    expected[0b1010] = -1 / math.sqrt(2)
    np.testing.assert_allclose(g.amps, expected, atol=1e-15)


def test_ghz_state_bell_pair():
    g = oc.ghz_state(BitPattern(0, 1), 0)
    np.testing.assert_allclose(g.amps, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)], atol=1e-15)


def test_ghz_basis_orthonormal():
    states = [
        oc.ghz_state(BitPattern(x, 2), y).amps for x in range(4) for y in (0, 1)
    ]
    gram = np.array([[np.vdot(a, b) for b in states] for a in states])
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-14)


def test_attack_state_pure_case():
    lam = np.zeros((4, 2))
    lam[0, 0] = 1.0
    psi = oc.attack_state(oc.AttackState(2, lam))
    ghz = oc.ghz_state(BitPattern(0, 2), 0)
    # product with the first adversary basis vector
    expected = np.einsum("g,e->ge", ghz.amps, np.eye(8)[0]).reshape(-1)
    np.testing.assert_allclose(psi.amps, expected, atol=1e-15)


def test_attack_state_diagonal_matches_lambdas():
    rng = np.random.default_rng(3)
    a = oc.AttackState.random(2, rng)
    amps = oc.attack_state(a).amps.reshape(8, 8)
    rho_ab = amps @ amps.conj().T
    for x in range(4):
        for y in (0, 1):
            vec = oc.ghz_state(BitPattern(x, 2), y).amps
            assert np.real(vec.conj() @ rho_ab @ vec) == pytest.approx(
                a.lambdas[x, y], abs=1e-12
            )


def test_attack_uniform_gives_maximally_mixed_marginal():
    a = oc.AttackState(2, np.full((4, 2), 1.0 / 8.0))
    amps = oc.attack_state(a).amps.reshape(8, 8)
    rho_ab = amps @ amps.conj().T
    np.testing.assert_allclose(rho_ab, np.eye(8) / 8.0, atol=1e-12)


def test_attack_validation():
    with pytest.raises(ValueError):
        oc.AttackState(2, np.full((4, 2), 0.2))  # sums to 1.6
    with pytest.raises(ValueError):
        oc.AttackState(2, np.array([[1.2, -0.2], [0, 0], [0, 0], [0, 0]]))


def test_attack_induced_distribution():
    rng = np.random.default_rng(6)
    a = oc.AttackState.random(3, rng)
    d = a.error_distribution()
    np.testing.assert_allclose(d.probs, a.lambdas.sum(axis=1), atol=1e-15)
    assert d.qx == pytest.approx(float(a.lambdas[:, 1].sum()), abs=1e-15)


def test_dcnot_truth_table():
    for x, y, z in itertools.product((0, 1), repeat=3):
        amps = np.zeros(8, dtype=complex)
        amps[(x << 2) | (y << 1) | z] = 1.0
        state = oc.PureState(amps, {"q": (0, 1, 2)})
        out = oc.dcnot(state, 0, 1, 2)
        assert np.flatnonzero(out.amps)[0] == (x << 2) | (y << 1) | (z ^ x ^ y)


def test_dcnot_involution_and_collision():
    rng = np.random.default_rng(4)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    amps /= np.linalg.norm(amps)
    state = oc.PureState(amps, {"q": (0, 1, 2)})
    twice = oc.dcnot(oc.dcnot(state, 0, 1, 2), 0, 1, 2)
    np.testing.assert_allclose(twice.amps, state.amps, atol=1e-14)
    with pytest.raises(ValueError):
        oc.dcnot(state, 0, 0, 2)


@pytest.mark.parametrize("p", [1, 2])
def test_delayed_circuit_matches_closed_form(p):
    worst = 1.0
    for mask_value in range(1 << p):
        mask = CadMask(BitPattern(mask_value, p))
        for xv, zv, y, w in itertools.product(
            range(1 << p), range(1 << p), (0, 1), (0, 1)
        ):
            x, z = BitPattern(xv, p), BitPattern(zv, p)
            out = oc.delayed_cad_circuit(basis_input(x, y, z, w), mask)
            ref = closed_form(x, y, z, w, mask)
            worst = min(worst, abs(np.vdot(ref.amps, out.amps)))
    assert worst >= 1.0 - 1e-10


def test_delayed_circuit_mask_off_leaves_rej_zero():
    p = 2
    state = basis_input(BitPattern(2, p), 1, BitPattern(1, p), 0)
    out = oc.delayed_cad_circuit(state, CadMask.from_string("00"))
    nz = np.flatnonzero(np.abs(out.amps) > 0)
    assert all((idx & 0b11) == 0 for idx in nz)  # rej occupies the lowest two bits


def test_delayed_circuit_noiseless_accepts():
    p = 2
    out = oc.delayed_cad_circuit(
        basis_input(BitPattern(0, p), 0, BitPattern(0, p), 0), CadMask.from_string("11")
    )
    arr = out.amps.reshape(8, 8, 2, 4)
    assert float(np.sum(np.abs(arr[:, :, :, 0]) ** 2)) == pytest.approx(1.0, abs=1e-12)


def test_delayed_circuit_requires_clean_ancillas():
    p = 1
    regs = two_block_registers(p)
    amps = np.zeros(1 << 5, dtype=complex)
    amps[1] = 1.0  # rej bit already set
    with pytest.raises(ValueError):
        oc.delayed_cad_circuit(oc.PureState(amps, regs), CadMask(BitPattern(1, 1)))


def test_conditioned_rho_pure_attack():
    lam = np.zeros((4, 2))
    lam[0, 0] = 1.0
    rho, pa = oc.conditioned_rho_aem(oc.AttackState(2, lam), CadMask.from_string("11"))
    assert pa == pytest.approx(1.0, abs=1e-12)
    assert oc.conditional_entropy(rho, "a", ("eve", "m")) == pytest.approx(1.0, abs=1e-10)


def test_conditioned_rho_acceptance_matches_combinatorial():
    rng = np.random.default_rng(12)
    for trial in range(6):
        a = oc.AttackState.random(2, rng, peak=6.0 if trial % 2 else 1.0)
        d = a.error_distribution()
        for ms in ("11", "10"):
            mask = CadMask.from_string(ms)
            _, pa = oc.conditioned_rho_aem(a, mask)
            assert pa == pytest.approx(p_accept(d, mask), abs=1e-10)


def test_conditioned_rho_soundness_sample():
    rng = np.random.default_rng(21)
    for _ in range(10):
        a = oc.AttackState.random(2, rng)
        d = a.error_distribution()
        mask = CadMask.from_string("11")
        rho, _ = oc.conditioned_rho_aem(a, mask)
        exact = oc.conditional_entropy(rho, "a", ("eve", "m"))
        bound, _ = entropy_bound(d, mask)
        assert exact >= bound - 1e-9


def test_message_symmetry():
    rng = np.random.default_rng(31)
    a = oc.AttackState.random(2, rng)
    rho, _ = oc.conditioned_rho_aem(a, CadMask.from_string("11"))
    rho0, prob0 = oc.project_register(rho, "m", 0)
    rho1, prob1 = oc.project_register(rho, "m", 1)
    assert prob0 == pytest.approx(0.5, abs=1e-10)
    assert prob1 == pytest.approx(0.5, abs=1e-10)
    h0 = oc.conditional_entropy(rho0, "a", "eve")
    h1 = oc.conditional_entropy(rho1, "a", "eve")
    assert h0 == pytest.approx(h1, abs=1e-10)


def test_oracle_cap():
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError):
        oc.conditioned_rho_aem(oc.AttackState.random(4, rng), CadMask.from_string("1111"))


def test_conditional_entropy_known_states():
    # maximally entangled pair: H(A|B) = -1
    bell = np.zeros((4, 4), dtype=complex)
    vec = np.array([1, 0, 0, 1]) / math.sqrt(2)
    bell = np.outer(vec, vec.conj())
    rho = oc.DensityState(bell, {"a": (0,), "b": (1,)})
    assert oc.conditional_entropy(rho, "a", "b") == pytest.approx(-1.0, abs=1e-12)
    # uniform qubit in product with anything: H(A|B) = 1
    prod = np.kron(np.eye(2) / 2.0, np.diag([0.3, 0.7]))
    rho = oc.DensityState(prod.astype(complex), {"a": (0,), "b": (1,)})
    assert oc.conditional_entropy(rho, "a", "b") == pytest.approx(1.0, abs=1e-12)


def test_conditional_entropy_classical_matches_shannon():
    # joint distribution over two bits
    joint = np.array([[0.4, 0.1], [0.2, 0.3]])
    rho = oc.DensityState(np.diag(joint.reshape(-1)).astype(complex), {"a": (0,), "b": (1,)})
    pb = joint.sum(axis=0)
    h_joint = -sum(p * math.log2(p) for p in joint.reshape(-1) if p > 0)
    h_b = -sum(p * math.log2(p) for p in pb if p > 0)
    assert oc.conditional_entropy(rho, "a", "b") == pytest.approx(h_joint - h_b, abs=1e-12)


def test_partial_trace_validation():
    rho = oc.DensityState(np.eye(4, dtype=complex) / 4.0, {"a": (0,), "b": (1,)})
    with pytest.raises(ValueError):
        oc.partial_trace(rho, "c")
    with pytest.raises(ValueError):
        oc.conditional_entropy(rho, "a", "a")


def test_theorem1_trivial_pairs():
    assert oc.theorem1_bound([(0.5, 0.5, 0.0)], 1.0) == pytest.approx(0.0, abs=1e-12)
    assert oc.theorem1_bound([(0.5, 0.5, 0.5)], 1.0) == pytest.approx(1.0, abs=1e-12)
    # vanishing norms contribute nothing
    assert oc.theorem1_bound([(0.0, 0.6, 0.0), (0.2, 0.2, 0.0)], 1.0) == pytest.approx(0.0)


def test_theorem1_rejects_cauchy_schwarz_violation():
    with pytest.raises(ValueError):
        oc.theorem1_bound([(0.25, 0.25, 0.3)], 0.5)
    with pytest.raises(ValueError):
        oc.theorem1_bound([(0.5, 0.5, 0.0)], 0.9)  # wrong normalization


def _explicit_state(pairs, m_norm):
    """Density operator of the block form the bound addresses, built explicitly."""
    n = len(pairs)
    dim = 2 * n
    f0 = np.zeros((n, dim))
    f1 = np.zeros((n, dim))
    for i, (n0, n1, re) in enumerate(pairs):
        if n0 > 0:
            f0[i, 2 * i] = math.sqrt(n0)
            alpha = re / math.sqrt(n0)
        else:
            alpha = 0.0
        f1[i, 2 * i] = alpha
        f1[i, 2 * i + 1] = math.sqrt(max(n1 - alpha * alpha, 0.0))
    block0 = sum(np.outer(v, v) for v in f0)
    block1 = sum(np.outer(v, v) for v in f1)
    rho = np.zeros((2 * dim, 2 * dim), dtype=complex)
    rho[:dim, :dim] = block0 / m_norm
    rho[dim:, dim:] = block1 / m_norm
    n_qubits = int(math.log2(dim))
    return oc.DensityState(
        rho, {"a": (0,), "e": tuple(range(1, n_qubits + 1))}
    )


def test_theorem1_lower_bounds_exact_entropy():
    rng = np.random.default_rng(17)
    for _ in range(20):
        raw = rng.dirichlet(np.ones(4)).reshape(2, 2)
        pairs = []
        for i in range(2):
            n0, n1 = raw[i]
            re = float(rng.uniform(-1.0, 1.0)) * math.sqrt(n0 * n1)
            pairs.append((n0, n1, re))
        m_norm = sum(n0 + n1 for n0, n1, _ in pairs)
        rho = _explicit_state(pairs, m_norm)
        exact = oc.conditional_entropy(rho, "a", "e")
        bound = oc.theorem1_bound(pairs, m_norm)
        assert bound <= exact + 1e-9


def test_theorem1_matches_engine_objective():
    rng = np.random.default_rng(23)
    a = oc.AttackState.random(2, rng)
    d = a.error_distribution()
    nu_vals = a.lambdas[:, 1].copy()
    for ms in ("11", "10"):
        mask = CadMask.from_string(ms)
        pa = p_accept(d, mask)
        pairs = []
        for x in range(4):
            for z in range(4):
                if (x ^ z) & mask.mask.value:
                    continue
                w = d.prob(x) * d.prob(z)
                re = (d.prob(x) - 2 * nu_vals[x]) * (d.prob(z) - 2 * nu_vals[z])
                pairs.append((w, w, re))
        bound = oc.theorem1_bound(pairs, 2.0 * pa)
        objective = entropy_objective(d, mask, NuVector(2, nu_vals))
        assert bound == pytest.approx(objective, abs=1e-10)


def test_pure_state_validation():
    with pytest.raises(ValueError):
        oc.PureState(np.array([1.0, 1.0], dtype=complex), {"a": (0,)})
    with pytest.raises(ValueError):
        oc.PureState(np.array([1.0, 0.0], dtype=complex), {"a": (0,), "b": (1,)})


def test_density_state_validation():
    with pytest.raises(ValueError):
        oc.DensityState(np.eye(2, dtype=complex), {"a": (0,)})  # trace 2
    bad = np.array([[0.5, 0.9], [0.9, 0.5]], dtype=complex)
    with pytest.raises(ValueError):
        oc.DensityState(bad, {"a": (0,)})  # not PSD

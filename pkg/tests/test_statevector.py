import numpy as np
import pytest

from eigencast import statevector as sv
from eigencast.eigen_engine import SCHMIDT, ImpossibleOutcomeError, draw_phases
from eigencast.spectral import SpinChainSpec, build_zzxz, diagonalize, shift_energy
from eigencast.validation import compare_engines, cross_validate, random_product_state


@pytest.fixture(scope="module")
def ed():
    return diagonalize(shift_energy(build_zzxz(SpinChainSpec(2, boundary="open")), 0.3))


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("name,p", [("V_bell", None), ("V_hadamard2", None), ("V_schmidt", None),
                                    ("hadamard", None), ("controlled_swap", None)])
def test_aux_unitary(name, p):
    w = sv.aux_operator(name, p)
    assert np.max(np.abs(w.conj().T @ w - np.eye(len(w)))) < 1e-12


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_dicke_projector(p):
    P = sv.aux_operator("symmetric_projector", p)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(P, P.conj().T, atol=1e-12)
    assert np.trace(P).real == pytest.approx(p + 1)


def test_evolve_exact(ed):
    rng = np.random.default_rng(0)
    psi = random_state(rng, 4)
    np.testing.assert_allclose(sv.evolve_exact(psi, ed, 0.0), psi, atol=1e-14)
    v = ed.eigenvectors[:, 2]
    np.testing.assert_allclose(sv.evolve_exact(v, ed, 1.3), np.exp(-1.3j * ed.eigenvalues[2]) * v, atol=1e-13)
    h = ed.reconstruct()
    out = sv.evolve_exact(psi, ed, 2.7)
    assert abs(np.linalg.norm(out) - 1) < 1e-10
    assert abs(np.vdot(out, h @ out) - np.vdot(psi, h @ psi)) < 1e-9
    with pytest.raises(ValueError):
        sv.evolve_exact(np.ones(3), ed, 1.0)


def test_controlled_evolution(ed):
    v = ed.eigenvectors[:, 1]
    st0 = sv.with_qubits(v, 1)
    out = sv.controlled_evolution(st0, 0, 0, ed, 0.9)
    np.testing.assert_allclose(out.amplitudes, st0.amplitudes)
    st1 = sv.apply_aux(st0, np.array([[0, 1], [1, 0]]), [0])
    out = sv.controlled_evolution(st1, 0, 0, ed, 0.9)
    np.testing.assert_allclose(out.system("1"), np.exp(-0.9j * ed.eigenvalues[1]) * v, atol=1e-13)
    with pytest.raises(ValueError):
        sv.controlled_evolution(st0, 1, 0, ed, 0.9)
    with pytest.raises(ValueError):
        sv.controlled_evolution(st0, 0, 1, ed, 0.9)


def test_hadamard_test_statistics(ed):
    tau = 0.77
    for j in range(ed.dimension):
        st = sv.with_qubits(ed.eigenvectors[:, j], 1)
        st = sv.apply_aux(st, sv.HADAMARD, [0])
        st = sv.controlled_evolution(st, 0, 0, ed, tau)
        st = sv.apply_aux(st, sv.HADAMARD, [0])
        _, _, p0 = sv.measure_register(st, [0], forced="0")
        assert p0 == pytest.approx(np.cos(ed.eigenvalues[j] * tau / 2) ** 2, abs=1e-12)


def test_apply_aux_examples():
    st = sv.with_qubits(np.array([1.0]), 2)
    out = sv.apply_aux(st, sv.V_BELL, [0, 1])
    np.testing.assert_allclose(out.vector, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-15)
    rng = np.random.default_rng(1)
    st3 = sv.StateVector(np.zeros((2, 2, 2, 3), complex), 3)
    amps = st3.amplitudes
    amps[0] = rng.normal(size=(2, 2, 3))
    st3 = sv.StateVector(amps / np.linalg.norm(amps), 3)
    np.testing.assert_allclose(sv.apply_aux(st3, sv.CONTROLLED_SWAP, [0, 1, 2]).amplitudes, st3.amplitudes)
    singlet = sv.StateVector(np.array([[0, 1], [-1, 0]]) / np.sqrt(2), 2)
    out = sv.apply_aux(singlet, sv.dicke_projector(2), [0, 1])
    assert out.norm() < 1e-15
    with pytest.raises(ValueError):
        sv.apply_aux(st, sv.HADAMARD, [0, 1])
    with pytest.raises(ValueError):
        sv.apply_aux(st, sv.HADAMARD, [5])


def test_measure_register():
    rng = np.random.default_rng(2)
    psi = random_state(rng, 3)
    st = sv.with_qubits(psi, 1)
    bits, collapsed, p = sv.measure_register(st, [0], rng=rng)
    assert bits == "0" and p == pytest.approx(1.0)
    plus = sv.apply_aux(st, sv.HADAMARD, [0])
    for b in "01":
        _, c, p = sv.measure_register(plus, [0], forced=b)
        assert p == pytest.approx(0.5)
        assert c.norm() == pytest.approx(1.0)
    with pytest.raises(ImpossibleOutcomeError):
        sv.measure_register(st, [0], forced="1")
    with pytest.raises(ValueError):
        sv.measure_register(st, [0])


def test_single_variant_on_eigenstate(ed):
    v = ed.eigenvectors[:, 3]
    out, nxt = sv.run_circuit_variant("single", v, ed, 0.5, forced="1")
    assert out.probability == pytest.approx(np.sin(ed.eigenvalues[3] * 0.25) ** 2, abs=1e-12)
    assert abs(abs(np.vdot(v, nxt)) - 1) < 1e-12


def test_swap_symmetric_input_heralds(ed):
    v = ed.eigenvectors[:, 0]
    system = np.multiply.outer(v, v)
    total = 0.0
    for b in ("000", "001", "010", "011"):
        try:
            out, _ = sv.run_circuit_variant("two_swap", system, ed, 1.1, forced=b)
            total += out.probability
        except ImpossibleOutcomeError:
            pass
    assert total == pytest.approx(1.0, abs=1e-12)


def test_schmidt_00_leaves_state(ed):
    rng = np.random.default_rng(3)
    c = rng.dirichlet(np.ones(4)) ** 0.5
    v = ed.eigenvectors
    system = sum(c[i] * np.multiply.outer(v[:, i], v[:, i]) for i in range(4))
    out, nxt = sv.run_circuit_variant("schmidt", system, ed, 0.8, forced="00")
    w0 = sv.joint_populations(system, ed)
    np.testing.assert_allclose(sv.joint_populations(nxt, ed), w0, atol=1e-12)
    assert out.herald_ok


def test_symmetric_failure_returns_none(ed):
    rng = np.random.default_rng(4)
    system = random_product_state(4, 2, rng)
    out, nxt = sv.run_circuit_variant("symmetric", system, ed, 0.9, forced="1xx", devices=2)
    assert nxt is None and not out.herald_ok


def test_norm_preserved_through_stages(ed):
    rng = np.random.default_rng(5)
    st = sv.with_qubits(random_product_state(4, 2, rng), 3)
    for q in range(3):
        st = sv.apply_aux(st, sv.HADAMARD, [q])
        assert abs(st.norm() - 1) < 1e-10
    for k in range(2):
        st = sv.controlled_evolution(st, 1 + k, k, ed, rng.uniform(0, 5))
        assert abs(st.norm() - 1) < 1e-10
    st = sv.apply_aux(st, sv.CONTROLLED_SWAP, [0, 1, 2])
    assert abs(st.norm() - 1) < 1e-10


CASES = [("single", 1), ("two_bell", 2), ("two_swap", 2), ("schmidt", 2), ("symmetric", 2), ("symmetric", 3)]


@pytest.mark.parametrize("case", range(len(CASES)))
def test_matches_engine(ed, case):
    variant, p = CASES[case]
    rng = np.random.default_rng(case)
    system = random_product_state(ed.dimension, p, rng)
    rep = compare_engines(variant, p, ed, system, rng.uniform(0, 10, 2))
    assert rep.passed(1e-10), rep


def test_cross_validate_default():
    assert all(r.passed() for r in cross_validate())


def test_schmidt_off_diagonal_decreases_in_expectation(ed):
    """Sampled trajectories under the circuit simulator; postselect on "01"."""
    rng = np.random.default_rng(7)
    rounds, runs = 4, 1000
    off = np.zeros((runs, rounds + 1))
    v = ed.eigenvectors
    c = np.array([0.6, 0.5, 0.4, 0.3])
    for r in range(runs):
        # product start, which carries off-diagonal weight
        system = np.multiply.outer(v @ c, v @ c)
        system /= np.linalg.norm(system)
        w = sv.joint_populations(system, ed)
        off[r, 0] = w.sum() - np.trace(w)
        for k in range(rounds):
            tau = rng.uniform(0, 4 * np.pi / ed.gap)
            pr = SCHMIDT.distribution(w, draw_phases(tau, ed.eigenvalues).phases)
            if pr[SCHMIDT.index("01")] < 1e-12:
                off[r, k + 1:] = off[r, k]
                break
            _, system = sv.run_circuit_variant("schmidt", system, ed, tau, forced="01")
            w = sv.joint_populations(system, ed)
            off[r, k + 1] = w.sum() - np.trace(w)
    trend = off.mean(axis=0)
    assert np.all(np.diff(trend) <= 1e-12)
    assert trend[-1] < 0.5 * trend[0]

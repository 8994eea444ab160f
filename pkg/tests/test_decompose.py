import numpy as np
import pytest

from qcohere import errors
from qcohere.decompose import (
    SeparableAnsatz,
    check_inequalities,
    collective_coherence,
    intrinsic_coherence,
    local_coherence_bd,
    local_coherence_bi,
    local_unitary_invariance_check,
    localized_coherence,
    params_to_ansatz,
    product_of_marginals,
    verify_closest_product,
)
from qcohere.divergence import metric
from qcohere.optim import OptimizerConfig
from qcohere.qstate import (
    StateRecipe,
    make_state,
    maximally_mixed,
    random_unitary,
    tensor,
    unitary,
    validate,
)
from conftest import (
    BELL_COHERENCE,
    BELL_SEPARABLE_CANDIDATE,
    PURE_COHERENCE,
    dist_oracle,
    random_density,
)

CFG = OptimizerConfig(starts=4, max_evals=2000, seed=0)
FINE = OptimizerConfig(starts=6, max_evals=3000, seed=0, polish_evals=12000)

# distance from the closest-found separable state to the computational
# dephasing for the symmetric two-site ground state; pinned from the first
# verified run (stable across seeds to machine precision)
ISING_QUARTER_LOCAL_BD = 0.6899771612824398


def bell_state():
    return make_state(StateRecipe("bell"))


def classical_pair():
    return validate(np.diag([0.5, 0.0, 0.0, 0.5]), [2, 2])


def two_qubit_mixed(rng):
    return validate(random_density(4, rng), [2, 2])


# ---------------------------------------------------------------------------
# product of marginals, collective and localized coherence


def test_product_of_marginals_fixes_products(rng):
    a = validate(random_density(2, rng), [2])
    b = validate(random_density(3, rng), [3])
    prod = tensor(a, b)
    assert np.abs(product_of_marginals(prod).mat - prod.mat).max() < 1e-12


def test_product_of_marginals_bell():
    assert np.abs(product_of_marginals(bell_state()).mat - np.eye(4) / 4).max() < 1e-12


def test_product_of_marginals_ghz():
    theta = np.pi / 3
    rho = make_state(StateRecipe("ghz", theta=theta, qubits=3))
    single = np.diag([np.cos(theta) ** 2, np.sin(theta) ** 2])
    expect = np.kron(np.kron(single, single), single)
    assert np.abs(product_of_marginals(rho).mat - expect).max() < 1e-12


def test_single_subsystem_guard():
    rho = maximally_mixed(4)
    for fn in (product_of_marginals, collective_coherence, localized_coherence):
        with pytest.raises(errors.SingleSubsystem):
            fn(rho)
    with pytest.raises(errors.SingleSubsystem):
        intrinsic_coherence(rho, CFG)


def test_collective_coherence_reference_points():
    assert collective_coherence(make_state(StateRecipe("plus_product", qubits=2))) == 0.0
    assert abs(collective_coherence(bell_state()) - BELL_COHERENCE) < 1e-12
    ghz = make_state(StateRecipe("ghz", theta=np.pi / 4, qubits=3))
    assert abs(collective_coherence(ghz) - PURE_COHERENCE[8]) < 1e-9


def test_collective_coherence_midpoint_spectrum_oracle():
    # the Bell value comes from the {5/8, 1/8, 1/8, 1/8} midpoint spectrum
    mid_spectrum = np.array([5 / 8, 1 / 8, 1 / 8, 1 / 8])
    s_mid = -(mid_spectrum * np.log2(mid_spectrum)).sum()
    want = np.sqrt(s_mid - (0.0 + 2.0) / 2)
    assert abs(collective_coherence(bell_state()) - want) < 1e-12


def test_localized_coherence_reference_points():
    assert localized_coherence(bell_state()) == 0.0
    plus = make_state(StateRecipe("plus_product", qubits=2))
    assert abs(localized_coherence(plus) - PURE_COHERENCE[4]) < 1e-12
    assert localized_coherence(maximally_mixed(4, (2, 2))) == 0.0


def test_localized_coherence_sees_only_marginals():
    # Bell and the classically correlated pair share maximally mixed marginals
    assert abs(localized_coherence(bell_state())
               - localized_coherence(classical_pair())) < 1e-12


def test_ghz_family_oscillates_in_antiphase():
    # wherever the collective part peaks the localized part bottoms out,
    # and the split at theta = pi/3 stays pinned to its first verified run
    grid = np.linspace(2 * np.pi / 48, 2 * np.pi, 48)
    cc, cl = [], []
    for theta in grid:
        rho = make_state(StateRecipe("ghz", theta=theta, qubits=3))
        cc.append(collective_coherence(rho))
        cl.append(localized_coherence(rho))
    cc, cl = np.array(cc), np.array(cl)
    at_peak = cc >= cc.max() - 1e-9
    assert np.all(cl[at_peak] <= cl.min() + 1e-9)
    at_bottom = cc <= cc.min() + 1e-9
    assert np.all(cl[at_bottom] >= cl.max() - 1e-9)

    third = make_state(StateRecipe("ghz", theta=np.pi / 3, qubits=3))
    assert abs(collective_coherence(third) - 0.7488545703655475) < 1e-10
    assert abs(localized_coherence(third) - 0.3703727132374737) < 1e-10
    oracle = dist_oracle(third.mat, product_of_marginals(third).mat)
    assert abs(collective_coherence(third) - oracle) < 1e-10


# ---------------------------------------------------------------------------
# intrinsic and local coherence


def test_intrinsic_coherence_zero_for_products(rng):
    prod = tensor(validate(random_density(2, rng), [2]),
                  validate(random_density(2, rng), [2]))
    value, _, _ = intrinsic_coherence(prod, CFG)
    assert value <= 1e-4


def test_intrinsic_coherence_zero_for_basis_product():
    rho = make_state(StateRecipe("ghz", theta=0.0, qubits=3))  # |000>
    value, _, _ = intrinsic_coherence(rho, CFG)
    assert value <= 1e-4


def test_intrinsic_coherence_zero_for_diagonal_mixture():
    value, _, _ = intrinsic_coherence(classical_pair(), CFG)
    assert value <= 1e-9  # the diagonal decomposition start is exact here


def test_intrinsic_coherence_bell_candidate_bound():
    candidate = dist_oracle(bell_state().mat, classical_pair().mat)
    assert abs(candidate - BELL_SEPARABLE_CANDIDATE) < 1e-12
    value, ansatz, _ = intrinsic_coherence(bell_state(), CFG)
    assert value <= candidate + 1e-4
    sigma = ansatz.to_density_matrix()
    assert abs(metric(bell_state(), sigma) - value) < 1e-6


def test_intrinsic_bounded_by_collective(rng):
    for _ in range(10):
        rho = two_qubit_mixed(rng)
        value, _, _ = intrinsic_coherence(rho, CFG)
        assert value <= collective_coherence(rho) + 1e-9


def test_intrinsic_n_terms_guard():
    with pytest.raises(errors.BadParameter):
        intrinsic_coherence(bell_state(), CFG, n_terms=0)
    with pytest.raises(errors.BadParameter):
        intrinsic_coherence(bell_state(), CFG, n_terms=17)


def test_ansatz_round_trip_and_state():
    rho = bell_state()
    _, ansatz, result = intrinsic_coherence(rho, CFG)
    assert isinstance(ansatz, SeparableAnsatz)
    assert abs(ansatz.weights.sum() - 1.0) < 1e-10
    assert all(abs(np.linalg.norm(f) - 1.0) < 1e-10
               for term in ansatz.factors for f in term)
    again = params_to_ansatz(result.params, rho.dims, ansatz.n_terms)
    assert np.abs(again.to_density_matrix().mat
                  - ansatz.to_density_matrix().mat).max() < 1e-12
    validate(ansatz.to_density_matrix().mat, rho.dims)


def test_local_coherence_bi_reference_points(rng):
    assert local_coherence_bi(maximally_mixed(4, (2, 2)), CFG) <= 1e-6
    plus = make_state(StateRecipe("plus_product", qubits=2))
    assert abs(local_coherence_bi(plus, CFG) - PURE_COHERENCE[4]) < 1e-4
    # at the Bell candidate the local part is the distance from the
    # classical pair to the maximally mixed state
    want = dist_oracle(classical_pair().mat, np.eye(4) / 4)
    got = local_coherence_bi(bell_state(), CFG)
    assert abs(got - want) < 1e-4


def test_local_coherence_bd_reference_points():
    rho = validate(np.diag([0.4, 0.1, 0.3, 0.2]), [2, 2])
    assert local_coherence_bd(rho, "computational", CFG) <= 1e-6
    plus = make_state(StateRecipe("plus_product", qubits=2))
    assert local_coherence_bd(plus, "hadamard", CFG) <= 1e-6


def test_local_coherence_bd_ising_regression():
    rho = make_state(StateRecipe("ising_ground", xi=np.pi / 4))
    got = local_coherence_bd(rho, "computational", FINE)
    assert abs(got - ISING_QUARTER_LOCAL_BD) < 1e-6


# ---------------------------------------------------------------------------
# inequality report


def test_report_bell_equalities():
    report = check_inequalities(bell_state(), cfg=CFG)
    assert abs(report.C - BELL_COHERENCE) < 1e-12
    assert abs(report.C_c - BELL_COHERENCE) < 1e-12
    assert report.C_l == 0.0
    assert abs(report.slack36) < 1e-12
    for v in report.slacks().values():
        assert v >= -1e-9


def test_report_plus_product_equalities():
    report = check_inequalities(make_state(StateRecipe("plus_product", qubits=2)),
                                cfg=CFG)
    assert report.C_c == 0.0
    assert abs(report.C_l - report.C) < 1e-12
    assert abs(report.slack36) < 1e-12


def test_report_random_battery(rng):
    for _ in range(30):
        report = check_inequalities(two_qubit_mixed(rng), cfg=CFG)
        for name, val in report.slacks().items():
            assert val >= -1e-9, (name, val)
        for val in report.coherence_values().values():
            assert -1e-12 <= val <= 1.0 + 1e-12


def test_report_degenerate_quadrilateral():
    # when the separable argmin and the diagonal state both sit at I/d the
    # intrinsic part carries the whole coherence
    report = check_inequalities(maximally_mixed(4, (2, 2)), cfg=CFG)
    assert abs(report.C - report.C_I) < 1e-6
    assert report.delta_C <= 1e-6 and report.C_L <= 1e-6


def test_report_serialization():
    report = check_inequalities(bell_state(), cfg=CFG)
    blob = report.to_dict()
    assert blob["delta_convention"] == "argmin"
    assert set(report.coherence_values()) <= set(blob)
    assert isinstance(blob["converged"], bool) and blob["evaluations"] > 0


# ---------------------------------------------------------------------------
# closest-product verification


def test_verify_closest_product_on_product_state(rng):
    prod = tensor(validate(random_density(2, rng), [2]),
                  validate(random_density(2, rng), [2]))
    assert verify_closest_product(prod, trials=200, seed=4) <= 0.0


def test_verify_closest_product_bell_and_mixed(rng):
    assert verify_closest_product(bell_state(), trials=500, seed=1) <= 1e-9
    rho = validate(random_density(8, rng), [2, 2, 2])
    assert verify_closest_product(rho, trials=500, seed=2) <= 1e-9


def test_verify_closest_product_guards():
    with pytest.raises(errors.SingleSubsystem):
        verify_closest_product(maximally_mixed(4), trials=10)
    with pytest.raises(errors.BadParameter):
        verify_closest_product(bell_state(), trials=0)


def test_marginal_product_is_not_always_the_closest_product():
    # Pinned counterexample: for this two-qubit state random search finds a
    # product state strictly closer (in the Jensen-Shannon metric) than the
    # product of the marginals, while under the relative entropy the
    # marginal product remains optimal.  Positive violations reported by
    # `verify_closest_product` are therefore real, not numerical noise.
    from qcohere.qstate import random_density_batch, _wrap

    rng = np.random.default_rng(np.random.SeedSequence([107, 2, 50]))
    rho = _wrap(random_density_batch(4, 1, rng)[0], (2, 2))
    violation = verify_closest_product(rho, trials=1000, seed=rng)
    assert violation > 5e-3

    # independent route: rebuild the same trial products and score them
    # with the plain-numpy oracle
    rng2 = np.random.default_rng(np.random.SeedSequence([107, 2, 50]))
    assert np.array_equal(random_density_batch(4, 1, rng2)[0], rho.mat)
    left = random_density_batch(2, 1000, rng2)
    right = random_density_batch(2, 1000, rng2)
    best = min(dist_oracle(rho.mat, np.kron(left[i], right[i])) for i in range(1000))
    d_ref = dist_oracle(rho.mat, product_of_marginals(rho).mat)
    assert best < d_ref - 5e-3


# ---------------------------------------------------------------------------
# local-unitary invariance


def test_local_unitary_identity():
    slacks = local_unitary_invariance_check(
        bell_state(), [unitary(np.eye(2)), unitary(np.eye(2))], CFG
    )
    assert slacks["collective"] == 0.0 and slacks["localized"] == 0.0
    assert slacks["intrinsic"] <= 1e-12 and slacks["local"] <= 1e-12


def test_local_unitary_closed_form_slacks(rng):
    slacks = local_unitary_invariance_check(
        bell_state(), [random_unitary(2, rng), random_unitary(2, rng)], CFG
    )
    assert slacks["collective"] <= 1e-9
    ghz = make_state(StateRecipe("ghz", theta=np.pi / 4, qubits=3))
    slacks = local_unitary_invariance_check(
        ghz, [random_unitary(2, rng) for _ in range(3)], CFG
    )
    assert slacks["localized"] <= 1e-9 and slacks["collective"] <= 1e-9


def test_local_unitary_optimized_slacks(rng):
    rho = two_qubit_mixed(rng)
    slacks = local_unitary_invariance_check(
        rho, [random_unitary(2, rng), random_unitary(2, rng)], FINE
    )
    assert slacks["intrinsic"] <= 1e-4 and slacks["local"] <= 1e-4


def test_local_unitary_count_guard():
    with pytest.raises(errors.DimensionMismatch):
        local_unitary_invariance_check(bell_state(), [unitary(np.eye(2))], CFG)


def test_bell_local_coherence_stable_across_degenerate_minimizers():
    # the closest separable state to a Bell pair is a one-parameter family;
    # the basis-independent local part must not depend on which member a
    # given seed lands on
    vals = []
    for seed in (3, 4, 5):
        cfg = OptimizerConfig(starts=6, max_evals=3000, seed=seed, polish_evals=8000)
        _, ansatz, _ = intrinsic_coherence(bell_state(), cfg)
        vals.append(local_coherence_bi(bell_state(),
                                       sigma_min=ansatz.to_density_matrix()))
    assert max(vals) - min(vals) <= 1e-4

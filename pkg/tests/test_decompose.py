import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exact_discriminant, io5_from_raw, product_residuals_hp, random_io5
from qubitio.canonical import CanonicalIO4, CanonicalIO5, to_kraus
from qubitio.channel import choi, classify_pattern
from qubitio.classify import gallery
from qubitio.decompose import (
    BLOCK_SLOTS,
    ab_terms,
    block_defect,
    compute_AB,
    decompose_io,
    delta_from_canonical,
    extract_entries,
    io_membership,
    product_residuals,
    quadratic_data,
    rank1_to_kraus,
    select_root,
    split_blocks,
)
from qubitio.errors import ConstraintViolation, NotIncoherentChannel, NoValidRoot
from qubitio.sampler import chunk_rng, sample_io


def _entries(form):
    return extract_entries(choi(to_kraus(form)))


def test_eq14_hand_values():
    ent = extract_entries(choi(gallery("eq14")))
    assert (ent.a, ent.b, ent.c, ent.d) == (0.5, 0.5, 0.5, 0.5)
    assert (ent.E, ent.F, ent.G) == (0.25, 0.25, 0.25)
    q = quadratic_data(ent)
    for minor in (q.d1, q.d2, q.d3, q.d4):
        assert minor == pytest.approx(1 / 16)
    assert q.delta == pytest.approx(0.0, abs=1e-15)
    assert q.disc_closed == pytest.approx(0.0, abs=1e-15)
    k, _ = select_root(q, ent)
    assert k == pytest.approx(1.0, rel=1e-12)
    assert compute_AB(k, ent) == pytest.approx((0.25, 0.25))


def test_roots_agree_with_numpy_roots():
    rng = chunk_rng(11, 0)
    for _ in range(200):
        q = quadratic_data(_entries(random_io5(rng)))
        ref = np.sort(np.roots([q.coeff_alpha, -q.coeff_beta, q.coeff_gamma]).real)
        assert len(q.roots) == 2
        assert np.allclose(q.roots, ref, rtol=1e-6)


def test_discriminant_closed_form_matches_exact_arithmetic():
    rng = chunk_rng(12, 0)
    for _ in range(100):
        ent = _entries(random_io5(rng))
        exact = float(exact_discriminant(ent))
        assert quadratic_data(ent).disc_closed == pytest.approx(exact, rel=1e-8)


def test_delta_closed_form_in_canonical_parameters():
    rng = chunk_rng(13, 0)
    for _ in range(200):
        form = random_io5(rng)
        assert quadratic_data(_entries(form)).delta == pytest.approx(delta_from_canonical(form), rel=1e-10)


def test_ab_terms_are_consistent():
    rng = chunk_rng(14, 0)
    for _ in range(100):
        ent = _entries(random_io5(rng))
        for k in (0.01, 0.7, 3.0, 250.0):
            t = ab_terms(k, ent)
            assert t.a_minus_A == pytest.approx(ent.a - t.A, rel=1e-9, abs=1e-13)
            assert t.b_minus_B == pytest.approx(ent.b - t.B, rel=1e-9, abs=1e-13)
            assert t.g2_over_A == pytest.approx(ent.G**2 / t.A, rel=1e-9)
            assert t.f2_over_B == pytest.approx(ent.F**2 / t.B, rel=1e-9)
            # k ties A and B together
            assert t.A * t.a_minus_A / (t.A * ent.d - ent.G**2) == pytest.approx(k, rel=1e-7)
    with pytest.raises(ValueError):
        ab_terms(0.0, ent)


def test_selected_root_satisfies_both_conditions():
    rng = chunk_rng(15, 0)
    for _ in range(200):
        ent = _entries(random_io5(rng))
        k, _ = select_root(quadratic_data(ent), ent)
        r1, r2 = product_residuals(ab_terms(k, ent), ent)
        assert max(r1, r2) <= 1e-8
        A, B = compute_AB(k, ent)
        assert ent.G**2 / ent.d < A < ent.a
        assert ent.F**2 / ent.c < B < ent.b


def test_split_blocks_are_rank_one_and_sum_to_choi():
    rng = chunk_rng(16, 0)
    for _ in range(100):
        form = sample_io(rng)
        m = choi(to_kraus(form))
        ent = extract_entries(m)
        k, _ = select_root(quadratic_data(ent), ent)
        A, B = compute_AB(k, ent)
        blocks = split_blocks(ent, A, B, ab_terms(k, ent))
        assert np.max(np.abs(sum(blocks.values()) - 2 * m)) <= 1e-14
        for tag, block in blocks.items():
            slots, alpha_index = BLOCK_SLOTS[tag]
            assert block_defect(block, slots) <= 1e-12
            kop = rank1_to_kraus(block, slots, alpha_index)
            v = kop.reshape(-1)
            assert np.max(np.abs(np.outer(v, v.conj()) - block)) <= 1e-12
            s = slots[alpha_index]
            assert abs(v[s].imag) == 0.0 and v[s].real >= 0


def test_rank1_to_kraus_zero_block():
    assert not rank1_to_kraus(np.zeros((4, 4)), (0, 1)).any()


def _check_solution(m, sol, tol=1e-9):
    assert len(sol.kraus) <= 4
    assert all(classify_pattern(k).incoherent for k in sol.kraus)
    assert np.max(np.abs(choi(sol.kraus) - m)) <= tol
    assert sol.choi_residual <= tol


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_round_trip_random_five_operator(seed):
    form = random_io5(np.random.default_rng(seed))
    m = choi(to_kraus(form))
    sol = decompose_io(m)
    _check_solution(m, sol)
    assert sol.canonical is not None
    assert np.max(np.abs(choi(to_kraus(sol.canonical)) - m)) <= 1e-9


@pytest.mark.parametrize(
    "zero, branch",
    [(("b1",), "sio"), (("r",), "sio"), (("a3", "b3"), "f0"), (("a2", "b2"), "g0"), (("a2", "b2", "a3", "b3"), "row")],
)
def test_degenerate_branches(rng, zero, branch):
    for _ in range(20):
        m = choi(to_kraus(random_io5(rng, zero=zero)))
        sol = decompose_io(m)
        assert sol.branch == branch
        _check_solution(m, sol)


def test_identity_and_dephasing():
    sol = decompose_io(choi(gallery("identity")))
    assert len(sol.kraus) == 1
    assert sol.canonical.alpha[1] == pytest.approx(1.0)
    assert sol.canonical.beta[1] == pytest.approx(1.0)
    sol = decompose_io(choi(gallery("dephasing")))
    assert len(sol.kraus) == 2 and sol.branch == "sio"
    assert sol.canonical_sio is not None


def test_hadamard_is_not_incoherent():
    m = choi(gallery("hadamard"))
    assert not io_membership(m)
    with pytest.raises(NotIncoherentChannel, match=r"channel is not incoherent: \|m02\| = "):
        decompose_io(m)


def test_perturbed_e_is_rejected():
    rng = chunk_rng(17, 0)
    rejected = 0
    for _ in range(50):
        m = choi(to_kraus(random_io5(rng)))
        bad = m.copy()
        for i, j in ((0, 1), (2, 3)):
            bad[i, j] *= 1.1
            bad[j, i] = np.conj(bad[i, j])
        try:
            sol = decompose_io(bad)
        except (ConstraintViolation, NoValidRoot):
            rejected += 1
            continue
        # whatever is returned must still be an honest decomposition of the input
        assert sol.choi_residual <= 1e-9
    assert rejected > 0


def test_extract_entries_rejects_completeness_breach():
    m = choi(gallery("eq14"))
    m[2, 3] += 0.01
    m[3, 2] = np.conj(m[2, 3])
    with pytest.raises(ConstraintViolation):
        extract_entries(m)


def test_select_root_without_roots():
    ent = extract_entries(choi(gallery("eq14")))
    q = quadratic_data(ent)
    with pytest.raises(NoValidRoot):
        select_root(dataclasses.replace(q, roots=()), ent)


def test_json_output_shape():
    out = decompose_io(choi(gallery("eq14"))).to_json()
    assert out["canonical"]["r"] == pytest.approx(1.0)
    assert out["num_operators"] == 4
    assert set(out["block_defects"]) == {"Row1", "Row2", "Diag", "Antidiag"}
    assert math.isfinite(out["quadratic"]["discriminant"])


def test_small_e_channel_is_accepted():
    # |e| ~ 3e-5: the direct second product residual sits near 1e-8 from rounding alone
    form = CanonicalIO4(
        1.1958053690738053,
        (5.930583794237747e-05, 0.7607422837185898, 0.6490540572371809),
        (
            0.39378822432917787 + 0.23730740918092189j,
            -0.2746778839274269 + 0.3482210153559118j,
            0.1979426346364717 + 0.5004601016942203j,
        ),
    )
    m = choi(to_kraus(form))
    sol = decompose_io(m)
    assert sol.branch == "quadratic" and sol.valid_roots == 2
    _check_solution(m, sol)
    ent = extract_entries(m)
    assert max(product_residuals_hp(sol.k, ent)) <= 1e-12


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), exponent=st.floats(-7, -1))
def test_near_degenerate_parameters(seed, exponent):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.2, 3.0)
    alpha = rng.uniform(0.05, 1.0, size=4)
    beta = rng.normal(size=3) + 1j * rng.normal(size=3)
    # shrink one parameter towards zero without reaching a degenerate branch
    slot = rng.integers(0, 7)
    if slot < 4:
        alpha[slot] *= 10**exponent
    else:
        beta[slot - 4] *= 10**exponent
    m = choi(to_kraus(io5_from_raw(r, alpha, beta)))
    sol = decompose_io(m)
    _check_solution(m, sol)


# couplings just under the zero threshold next to a near-singular block
BOUNDARY_CASES = [
    CanonicalIO5(
        r=1.1130287921740054,
        alpha=(5.951827440671092e-11, 0.5285951185554593, 0.10222550065355623, 0.8426963555489424),
        beta=(-9.074327399840688e-13 - 1.1678686791256438e-13j, 2.103673620207918e-07 - 1.4127193861089867e-06j,
              -0.4475481092141322 + 0.89425985593496j),
    ),
    CanonicalIO5(
        r=2.3430795253307615,
        alpha=(0.14040695075393658, 0.8681142974890282, 1.2030737335520422e-11, 0.34414031111691035),
        beta=(0.31414078618304153 - 0.1167341838441757j, -7.194120694766705e-09 - 1.0899947815784292e-09j,
              -0.18369924531673068 + 0.48718763990128394j),
    ),
]


@pytest.mark.parametrize("form", BOUNDARY_CASES)
def test_boundary_couplings_are_kept(form):
    m = choi(to_kraus(form))
    _check_solution(m, decompose_io(m))


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_several_tiny_parameters(seed):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.0, 3.0)
    alpha = rng.uniform(0.0, 1.0, size=4)
    beta = rng.normal(size=3) + 1j * rng.normal(size=3)
    for slot in rng.choice(7, size=rng.integers(1, 4), replace=False):
        scale = 10 ** rng.uniform(-14, -1)
        if slot < 4:
            alpha[slot] *= scale
        else:
            beta[slot - 4] *= scale
    m = choi(to_kraus(io5_from_raw(r, alpha, beta)))
    _check_solution(m, decompose_io(m))

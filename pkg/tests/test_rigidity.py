import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qccarpet.carpet import cstar_carpet, ring_carpet, sierpinski
from qccarpet.maps import CircleMap, PlaneMap, identity_map, rotation_map
from qccarpet.modulus import HolePairing
from qccarpet.rigidity import (CONJECTURE_NOTE, HypothesisError, IntervalMap, RigidityError, carpet_rigidity_pipeline,
                               circle_periodicity_witness, cstar_pipeline, find_fixed_point,
                               interval_periodicity_witness, square_carpet_pipeline)

TWO_PI = 2 * np.pi
K_WIDE = (0.8, 0.4, 0.4, 0.2)


@st.composite
def increasing_pl(draw, n=8):
    """Random increasing PL self-map of [0, 1] fixing the ends."""
    xs = np.sort(np.array(draw(st.lists(st.floats(0.01, 0.99), min_size=n, max_size=n, unique=True))))
    ys = np.sort(np.array(draw(st.lists(st.floats(0.01, 0.99), min_size=n, max_size=n, unique=True))))
    return IntervalMap(np.concatenate([[0], xs, [1]]), np.concatenate([[0], ys, [1]]))


def perturbed(eps=1e-3):
    return PlaneMap(lambda z: z + eps * (np.sin(7 * z.real + 3 * z.imag) + 1j * np.cos(5 * z.real - 2 * z.imag)))


# --- periodic points on intervals and circles --------------------------------

def test_interval_identity():
    assert interval_periodicity_witness(IntervalMap.identity()) is None
    assert interval_periodicity_witness(IntervalMap(np.linspace(0, 1, 9), np.linspace(0, 1, 9))) is None


def test_interval_square_map():
    h = IntervalMap.from_callable(lambda x: x * x, 0.0, 1.0)
    w = interval_periodicity_witness(h)
    assert w.x == pytest.approx(0.5)
    assert w.direction == "decreasing"
    expected = [0.5 ** (2 ** n) for n in range(len(w.orbit))]
    assert np.allclose(w.orbit, expected, rtol=1e-12, atol=0)
    assert all(b < a for a, b in zip(w.orbit, w.orbit[1:]))


def test_interval_map_validation():
    with pytest.raises(RigidityError):
        IntervalMap([0, 0.5, 1], [0, 0.7, 0.6])
    with pytest.raises(RigidityError):
        IntervalMap([0, 1], [0.1, 1])


@settings(max_examples=100, deadline=None)
@given(increasing_pl())
def test_interval_witness_monotone(h):
    xs = np.linspace(0, 1, 1001)
    if np.max(np.abs(h(xs) - xs)) <= 1e-9:
        return
    w = interval_periodicity_witness(h)
    assert w is not None
    d = np.diff(w.orbit)
    assert len(w.orbit) >= 2
    assert np.all(d < 0) if w.direction == "decreasing" else np.all(d > 0)
    # the orbit really is the orbit of h
    assert np.allclose(w.orbit[1:], h(np.array(w.orbit[:-1])), rtol=0, atol=1e-15)


def test_circle_examples():
    assert circle_periodicity_witness(CircleMap.identity(16)) is None
    h = CircleMap.from_lift(lambda t: t + 0.1 * np.sin(t / 2) ** 2, 256)
    w = circle_periodicity_witness(h)
    assert w is not None and w.direction == "increasing"
    assert all(b > a for a, b in zip(w.orbit, w.orbit[1:]))
    with pytest.raises(HypothesisError, match="no fixed point") as exc:
        circle_periodicity_witness(CircleMap.rotation(TWO_PI / 3, 8))
    assert exc.value.name == "no fixed point"
    t = np.arange(16) * TWO_PI / 16
    with pytest.raises(HypothesisError, match="orientation"):
        circle_periodicity_witness(CircleMap(t, np.mod(-t, TWO_PI)))


def test_circle_cut_choice_does_not_change_verdict():
    h = CircleMap.from_lift(lambda t: t + 0.05 * np.sin(t) ** 2, 256)  # fixed at 0 and pi
    cuts = [0.0, np.pi]
    assert all(abs(np.angle(np.exp(1j * (h.lift(c) - c)))) <= 1e-12 for c in cuts)
    verdicts = [circle_periodicity_witness(h, fixed=c) is not None for c in cuts]
    assert verdicts == [True, True]
    ident = CircleMap.identity(32)
    assert [circle_periodicity_witness(ident, fixed=c) for c in (0.0, 1.0, 4.0)] == [None] * 3


def test_find_fixed_point():
    h = CircleMap.from_lift(lambda t: t + 0.1 * np.sin(t / 2) ** 2, 64)
    assert find_fixed_point(h) == pytest.approx(0.0, abs=1e-12)
    assert find_fixed_point(CircleMap.rotation(0.5)) is None


# --- carpet pipeline ------------------------------------------------------

@pytest.mark.parametrize("depth,n", [(1, 64), (2, 128), (2, 256), (3, 256)])
def test_carpet_identity_stable(depth, n):
    rep = carpet_rigidity_pipeline(sierpinski(depth), identity_map(), 1, n=n)
    assert rep.verdict == "identity" and rep.residual == 0
    assert rep.witness is None


def test_carpet_rotation_has_no_fixed_point():
    f = rotation_map(np.pi / 2, 0.5 + 0.5j)
    with pytest.raises(HypothesisError, match="no fixed point") as exc:
        carpet_rigidity_pipeline(sierpinski(2), f, 4)
    assert exc.value.name == "no fixed point"


def test_carpet_perturbed_is_inconclusive():
    rep = carpet_rigidity_pipeline(sierpinski(2), perturbed(1e-3), 1)
    assert rep.verdict == "inconclusive"
    assert 5e-4 <= rep.residual <= 2e-3
    assert any(c["name"] == "fixed point" and c["pass"] for c in rep.hypothesis_checks)


def test_carpet_gates():
    S = sierpinski(1)
    with pytest.raises(HypothesisError) as exc:
        carpet_rigidity_pipeline(S, PlaneMap(lambda z: 0.5 * z), 1)
    assert exc.value.name in {"periodic", "self-map"}
    refl = PlaneMap(lambda z: np.conj(z) + 1j)  # mirror in y = 1/2: outer boundary kept, orientation reversed
    with pytest.raises(HypothesisError) as exc:
        carpet_rigidity_pipeline(S, refl, 2)
    assert exc.value.name == "orientation"


def test_report_json():
    rep = carpet_rigidity_pipeline(sierpinski(1), identity_map(), 1)
    d = json.loads(rep.dumps())
    assert set(d) >= {"verdict", "residual", "witness", "orbit_period", "hypothesis_checks"}
    assert all(set(c) == {"name", "pass", "detail"} for c in d["hypothesis_checks"])


# --- square carpet pipeline -------------------------------------------------

def test_square_identity():
    S = ring_carpet(2.0, K_WIDE, 1)
    rep = square_carpet_pipeline(S, identity_map())
    assert rep.verdict == "identity" and rep.residual == 0 and rep.orbit_period == 1
    assert rep.details["bound"]["implied"]


def test_square_four_cycle_fixing_K():
    S = ring_carpet(2.0, K_WIDE, 1)
    R = S.rects()
    side = R[1, 2]
    congruent = [i for i in range(1, len(R)) if np.isclose(R[i, 2], side) and np.isclose(R[i, 3], side)][:4]
    assert len(congruent) == 4
    pairing = HolePairing.cycle(len(R), congruent)
    rep = square_carpet_pipeline(S, pairing=pairing)
    assert rep.orbit_period == 1
    assert rep.details["orbits"] == [congruent]


def test_square_shrinking_pairing_contradiction():
    S = ring_carpet(2.0, K_WIDE, 2)
    R = S.rects()
    tiny = int(np.argmin(R[:, 3]))
    rep = square_carpet_pipeline(S, pairing=HolePairing.swap(len(R), 0, tiny))
    assert rep.verdict == "contradiction"
    assert rep.orbit_period == 2
    assert not rep.details["bound"]["implied"]


def test_square_gates():
    S = ring_carpet(2.0, K_WIDE, 1)
    with pytest.raises(HypothesisError) as exc:
        square_carpet_pipeline(S, rotation_map(np.pi, 1 + 0.5j))
    assert exc.value.name == "fixes the four vertices"
    bump = PlaneMap(lambda z: z + 0.02 * np.sin(np.pi * z.real / 2) ** 2 * np.sin(np.pi * z.imag) ** 2)
    with pytest.raises(HypothesisError) as exc:
        square_carpet_pipeline(S, bump)
    assert exc.value.name == "hole set invariant"
    with pytest.raises(RigidityError):
        square_carpet_pipeline(sierpinski(1), identity_map())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_square_orbit_period_divides_order(seed):
    S = ring_carpet(2.0, K_WIDE, 1)
    n = len(S.rects())
    perm = np.random.default_rng(seed).permutation(n)
    rep = square_carpet_pipeline(S, pairing=HolePairing(perm))
    order = 1
    q = perm.copy()
    while not np.array_equal(q, np.arange(n)):
        q = perm[q]
        order += 1
    assert order % rep.orbit_period == 0


# --- C* pipeline ----------------------------------------------------------

@pytest.fixture(scope="module")
def symmetric_cstar():
    return cstar_carpet(math.e, (0.3, 0.4, 0.2, 0.4), 2, symmetry=4)


def test_cstar_identity(symmetric_cstar):
    rep = cstar_pipeline(symmetric_cstar, identity_map())
    assert rep.verdict == "periodic" and rep.details["order"] == 1 and rep.orbit_period == 1
    assert rep.residual == 0
    assert CONJECTURE_NOTE in rep.notes


@pytest.mark.parametrize("m,order", [(1, 4), (2, 2), (3, 4)])
def test_cstar_rotation_order(symmetric_cstar, m, order):
    rep = cstar_pipeline(symmetric_cstar, rotation_map(m * np.pi / 2))
    assert rep.verdict == "periodic"
    assert rep.details["order"] == order
    assert rep.orbit_period == order


def test_cstar_shrinking_pairing():
    S = cstar_carpet(math.e, (0.3, 0.2, 0.5, 0.5), 2)
    R = S.rects()
    rep = cstar_pipeline(S, pairing=HolePairing.swap(len(R), 0, int(np.argmin(R[:, 2]))))
    assert rep.verdict == "contradiction"


def test_cstar_gates(symmetric_cstar):
    with pytest.raises(HypothesisError) as exc:
        cstar_pipeline(symmetric_cstar, PlaneMap(lambda z: 1.2 * z))
    assert exc.value.name == "inner circle preserved"
    with pytest.raises(HypothesisError) as exc:
        cstar_pipeline(symmetric_cstar, PlaneMap(lambda z: np.conj(z)))
    assert exc.value.name == "orientation"

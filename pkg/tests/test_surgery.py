import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qccarpet.carpet import sierpinski, symmetric_carpet
from qccarpet.extension import carpet_periodic_extension, conjugated_carpet_rotation, hole_orbits
from qccarpet.extension.surgery import SurgeryError, initial_extension, match_holes
from qccarpet.maps import CarpetMap, CircleMap, PlaneMap, identity_map, rotation_map

TWO_PI = 2 * np.pi


def square_points(n=10_000, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(0, 1, n) + 1j * rng.uniform(0, 1, n)


def rotation_oracle(S):
    """Hole permutation of the quarter turn about (1/2, 1/2), straight from the centres."""
    key = {(round(x, 9), round(y, 9)): i for i, (x, y, _) in enumerate(S.holes)}
    return np.array([key[(round(1 - y, 9), round(x, 9))] for x, y, _ in S.holes])


def cycles(perm):
    seen, out = set(), []
    for i in range(len(perm)):
        if i in seen:
            continue
        c, j = [], i
        while j not in seen:
            seen.add(j)
            c.append(j)
            j = perm[j]
        out.append(len(c))
    return sorted(out)


def iterate(F, z, n):
    for _ in range(n):
        z = F(z)
    return z


def test_orbits_identity():
    S = sierpinski(2)
    orb = hole_orbits(S, CarpetMap.identity(S.n_holes), 4)
    assert orb.periods == [1] * 9
    assert sorted(o[0] for o in orb.orbits) == list(range(9))


@pytest.mark.parametrize("centre", [True, False])
def test_orbits_of_quarter_turn(centre):
    S = symmetric_carpet(centre=centre)
    perm = match_holes(S, rotation_map(np.pi / 2, 0.5 + 0.5j))
    assert perm.tolist() == rotation_oracle(S).tolist()
    orb = hole_orbits(S, rotation_map(np.pi / 2, 0.5 + 0.5j), 4)
    assert sorted(orb.periods) == ([1, 4] if centre else [4])


def test_mixed_periods():
    S = sierpinski(2)
    perm = np.array([1, 0, 2, 4, 5, 6, 3, 8, 7])
    cmap = CarpetMap(perm, [CircleMap.identity()] * 9)
    orb = hole_orbits(S, cmap, 4)
    assert sorted(orb.periods) == cycles(perm) == [1, 2, 2, 4]
    # orbits partition the holes and follow the permutation
    flat = sorted(h for o in orb.orbits for h in o)
    assert flat == list(range(9))
    for o in orb.orbits:
        assert all(perm[a] == b for a, b in zip(o, o[1:] + o[:1]))
        assert orb.V(orb.orbits.index(o)) == o[:-1]
        assert orb.W(orb.orbits.index(o)) == o[1:]
    with pytest.raises(SurgeryError):
        hole_orbits(S, cmap, 3)


def test_matching_failure():
    S = symmetric_carpet()
    with pytest.raises(SurgeryError, match="orbit matching failed"):
        match_holes(S, PlaneMap(lambda z: z + 0.05))


def test_identity_surgery():
    S = sierpinski(2)
    F = carpet_periodic_extension(S, CarpetMap.identity(S.n_holes), 1)
    z = square_points(3000)
    assert np.max(np.abs(F(z) - z)) <= 1e-12


def test_plain_rotation_surgery():
    S = symmetric_carpet()
    perm = rotation_oracle(S)
    shift = CircleMap.rotation(np.pi / 2, 8)
    rot = rotation_map(np.pi / 2, 0.5 + 0.5j)
    F = carpet_periodic_extension(S, CarpetMap(perm, [shift] * 5, interior=rot), 4)
    z = square_points()
    assert np.max(np.abs(F(z) - rot(z))) <= 1e-12


@pytest.fixture(scope="module")
def conjugated():
    S = symmetric_carpet()
    cmap = conjugated_carpet_rotation(S)
    return S, cmap, carpet_periodic_extension(S, cmap, 4)


def test_conjugated_rotation_surgery(conjugated):
    S, cmap, F = conjugated
    assert cmap.perm.tolist() == rotation_oracle(S).tolist()
    assert sorted(F.orbits.periods) == cycles(rotation_oracle(S))
    z = square_points()
    assert np.max(np.abs(iterate(F, z, 4) - z)) <= 1e-4 * np.sqrt(2)
    rot = rotation_map(np.pi / 2, 0.5 + 0.5j)
    assert np.max(np.abs(F(z) - rot(z))) > 1e-3
    # the initial extension is not periodic; that is what the surgery repairs
    f0 = initial_extension(S, cmap)
    assert np.max(np.abs(iterate(f0, z, 4) - z)) > 1e-5


def test_surgery_keeps_initial_extension_off_last_holes(conjugated):
    S, cmap, F = conjugated
    f0 = initial_extension(S, cmap)
    z = square_points(20_000, 5)
    hole = S.hole_of(z)
    last = {o[-1] for o in F.orbits.orbits}
    keep = ~np.isin(hole, list(last))
    assert np.max(np.abs(F(z[keep]) - f0(z[keep]))) <= 1e-14


def test_surgery_boundary_return_map(conjugated):
    S, cmap, F = conjugated
    charts = S.charts()
    th = np.linspace(0, TWO_PI, 97, endpoint=False)
    for orbit, m in zip(F.orbits.orbits, F.orbits.periods):
        ch = charts[orbit[0]]
        b = ch.boundary_point(th)
        ret = cmap.hole_maps[orbit[0]]
        for i in orbit[1:]:
            ret = cmap.hole_maps[i] @ ret
        want = ch.boundary_point(ret.lift(th))
        assert np.max(np.abs(iterate(F, b, m) - want)) <= 1e-9


def test_invalid_initial_extension():
    S = symmetric_carpet()
    t = np.arange(16) * TWO_PI / 16
    rev = CircleMap(t, np.mod(-t, TWO_PI))
    cmap = CarpetMap(np.arange(5), [rev] + [CircleMap.identity()] * 4, interior=identity_map())
    with pytest.raises(SurgeryError, match="invalid initial extension"):
        carpet_periodic_extension(S, cmap, 2)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 1000), st.floats(0.05, 0.3), st.sampled_from([1, 2, 3]))
def test_surgery_periodic_property(seed, amp, turns):
    S = symmetric_carpet()
    cmap = conjugated_carpet_rotation(S, turns, amp=amp, seed=seed, n=32)
    k = 4 if turns != 2 else 2
    F = carpet_periodic_extension(S, cmap, k)
    z = square_points(2000, seed)
    assert np.max(np.abs(iterate(F, z, k) - z)) <= 1e-4 * np.sqrt(2)

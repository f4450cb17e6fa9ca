import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qccarpet.extension import extend_to_plane, periodic_annulus_extension, reflect, reflection_tower_extend
from qccarpet.extension.tower import TowerError, default_depth
from qccarpet.geometry import PointC
from qccarpet.maps import CircleMap, MapError, PlaneMap, conjugated_rotation, identity_map, rotation_map

TWO_PI = 2 * np.pi


def random_plane(n=10_000, seed=0, half=2.0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-half, half, n) + 1j * rng.uniform(-half, half, n)


def disk_points(n=5000, seed=0):
    rng = np.random.default_rng(seed)
    return np.sqrt(rng.uniform(0, 1, n)) * np.exp(1j * rng.uniform(0, TWO_PI, n))


@pytest.fixture(scope="module")
def conj3():
    return periodic_annulus_extension(conjugated_rotation(3, n=64), 0.5, 3)


def test_reflect_examples():
    r = 0.6
    assert reflect(r + 0j, r) == pytest.approx(r)
    assert reflect(1 + 0j, r) == pytest.approx(r * r)
    p = reflect(PointC(0.0, 2.0), r)
    assert isinstance(p, PointC) and complex(p) == pytest.approx(0.18j)
    with pytest.raises(TowerError, match="pole"):
        reflect(0j, r)


def test_reflection_algebra():
    r = 0.6
    z = random_plane(10_000, 1)
    assert np.max(np.abs(reflect(reflect(z, r), r) - z)) <= 1e-12 * max(1, np.abs(z).max())
    w = reflect(z, r)
    assert np.allclose(np.abs(z) * np.abs(w), r * r, rtol=1e-13)
    assert np.allclose(np.angle(w), np.angle(z), atol=1e-12)
    circ = r * np.exp(1j * np.linspace(0, TWO_PI, 10_000))
    assert np.max(np.abs(reflect(circ, r) - circ)) <= 1e-12
    unit = np.exp(1j * np.linspace(0, TWO_PI, 10_000))
    assert np.max(np.abs(np.abs(reflect(unit, r)) - r * r)) <= 1e-12


def test_default_depth_below_spacing():
    for r in (0.3, 0.5, 0.9):
        M = default_depth(r)
        assert r ** (2 ** M) < 4 / 256
        assert M == 1 or r ** (2 ** (M - 1)) >= 4 / 256


def test_tower_identity_and_rotation():
    ident = PlaneMap(lambda z: z.copy(), lambda w: w.copy())
    T = reflection_tower_extend(ident, r=0.5)
    z = disk_points()
    assert np.max(np.abs(T.f_inf(z) - z)) <= 1e-13
    assert T.f_inf(np.array([0j]))[0] == 0
    rot = rotation_map(TWO_PI / 5)
    T = reflection_tower_extend(rot, r=0.4, k=5)
    assert np.max(np.abs(T.f_inf(z) - np.exp(TWO_PI / 5 * 1j) * z)) <= 1e-12
    assert all(ring["residual"] <= 1e-12 for ring in T.manifest["rings"])


def test_tower_conjugated_rotation(conj3):
    T = reflection_tower_extend(conj3, k=3)
    assert T.depth == default_depth(0.5)
    z = disk_points(10_000, 3)
    w = T.f_inf(T.f_inf(T.f_inf(z)))
    assert np.max(np.abs(w - z)) <= 1e-5
    m = json.loads(T.manifest_json())
    assert [x["ring"] for x in m["rings"]] == list(range(T.depth + 1))
    res = [x["residual"] for x in m["rings"]]
    assert m["monotone"] == all(b <= a + 1e-15 for a, b in zip(res, res[1:]))
    assert {"rho", "residual"} <= set(m["rings"][0])


def test_tower_levels_share_values(conj3):
    T = reflection_tower_extend(conj3, depth=3)
    lo = 0.5 ** 4  # A_{r^(2^2)} is shared by levels 2 and 3
    rad = np.linspace(lo, 1, 40)
    z = (rad[:, None] * np.exp(1j * np.linspace(0, TWO_PI, 30))[None, :]).ravel()
    assert np.array_equal(T.level(2)(z), T.level(3)(z))
    with pytest.raises(MapError, match="out of domain"):
        T.level(1)(np.array([0.1 + 0j]))
    with pytest.raises(TowerError):
        T.level(7)


def test_tower_reflection_rule(conj3):
    """On ring m the map is R_rho f R_rho with rho = r^(2^(m-1))."""
    T = reflection_tower_extend(conj3, depth=3)
    rho = 0.5
    z = np.sqrt(0.5 ** 4 + (0.25 - 0.5 ** 4) * np.linspace(0.01, 0.99, 50)) * np.exp(1j * np.linspace(0, 6, 50))
    assert np.allclose(T.f_inf(z), reflect(T.f_inf(reflect(z, rho)), rho), atol=1e-13)


def test_tower_rejects_bad_boundary():
    squash = PlaneMap(lambda z: 0.9 * z)
    with pytest.raises(TowerError, match="boundary not preserved"):
        reflection_tower_extend(squash, r=0.5)
    with pytest.raises(TowerError):
        reflection_tower_extend(identity_map())


def test_extend_to_plane_examples(conj3):
    z = random_plane()
    P = extend_to_plane(identity_map())
    assert np.max(np.abs(P(z) - z)) <= 1e-14
    assert P.window == (-2.0, 2.0, -2.0, 2.0)
    R = extend_to_plane(rotation_map(0.7))
    assert np.max(np.abs(R(z) - np.exp(0.7j) * z)) <= 1e-13
    T = reflection_tower_extend(conj3, k=3)
    F = extend_to_plane(T.f_inf)
    w = F(F(F(z)))
    disk_res = max(x["residual"] for x in T.manifest["rings"])
    assert np.max(np.abs(w - z)) <= 1e-5
    assert np.max(np.abs(w - z)) <= 100 * max(disk_res, 1e-14) * 4
    assert np.max(np.abs(F.inverse()(F(z)) - z)) <= 1e-9


def test_extend_to_plane_rejects():
    with pytest.raises(TowerError, match="boundary not preserved"):
        extend_to_plane(PlaneMap(lambda z: 0.5 * z))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-50, 50), st.floats(-50, 50))
def test_reflection_involution_property(r, x, y):
    z = complex(x, y)
    if abs(z) < 1e-3:
        return
    assert abs(reflect(reflect(z, r), r) - z) <= 1e-12 * abs(z)

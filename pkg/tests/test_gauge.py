import json
import math

import numpy as np
import pytest

from diracwalk.experiments import gauge_check
from diracwalk.gauge import (ElectricField, FreeField, PhaseChange, TabulatedField, UniformElectricField,
                             continuum_potential, field_from_dict, field_to_dict, gauge_transform, load_field,
                             potential_from_angles, save_field, simplified_transform_constant_substeps,
                             simplified_transform_linear_interpolation, transform_deltas,
                             uniform_electric_config)
from diracwalk.lattice import Family, LatticeSpec, SiteIndex, SpinorField, positions, translate_index
from diracwalk.walks import WalkKind, build_walk, step

S3 = math.sqrt(3)
LAT = LatticeSpec(Family.EQUILATERAL, 12, 12)


def random_tables(rng, steps=10, lat=LAT):
    return TabulatedField(rng.uniform(-math.pi, math.pi, size=(steps, 3, 3) + lat.shape))


def test_zero_phase_leaves_config_unchanged(rng):
    base = random_tables(rng)
    tf = gauge_transform(base, PhaseChange.zero())
    for slot in (1, 2, 3):
        for a, b in zip(tf.angles(slot, 3.0, LAT), base.angles(slot, 3.0, LAT)):
            np.testing.assert_array_equal(np.broadcast_to(a, LAT.shape), np.broadcast_to(b, LAT.shape))


def test_global_constant_phase_changes_nothing(rng):
    base = random_tables(rng)
    tf = gauge_transform(base, PhaseChange.constant(0.83))
    for slot in (1, 2, 3):
        a, x, _ = tf.angles(slot, 0.0, LAT)
        a0, x0, _ = base.angles(slot, 0.0, LAT)
        assert np.max(np.abs(a - a0)) < 1e-15 and np.max(np.abs(x - x0)) < 1e-15


@pytest.mark.parametrize("n", [4, 8, 12, 16])
def test_gauge_invariance_random(n):
    for seed in range(3):
        assert gauge_check(seed, n=n, steps=10).deviation < 1e-12


def test_gauge_invariance_with_uniform_field(rng):
    w = build_walk(WalkKind.THREE_STEP_EQUILATERAL, 0.3)
    base = UniformElectricField(0.2, 0.1)
    ph = PhaseChange.random(rng, LAT, 10)
    psi = SpinorField(LAT, rng.normal(size=(2, 12, 12)) + 0j)
    a = psi
    b = SpinorField(LAT, psi.psi * np.exp(1j * ph(0.0, LAT)))
    tf = gauge_transform(base, ph)
    for n in range(10):
        a = step(w, a, n * w.dt, base)
        b = step(w, b, n * w.dt, tf)
    assert np.max(np.abs(b.psi - a.psi * np.exp(1j * ph(10 * w.dt, LAT)))) < 1e-12


def test_negative_control_and_zero_phase():
    assert gauge_check(4, corrupt=True).deviation > 1e-3
    assert gauge_check(4, zero_phase=True).deviation == 0.0


def test_static_uniform_phase_keeps_density(rng):
    w = build_walk(WalkKind.THREE_STEP_EQUILATERAL, 0.5)
    base = random_tables(rng, 5)
    tf = gauge_transform(base, PhaseChange.constant(1.2))
    raw = rng.normal(size=(2, 12, 12)) + 1j * rng.normal(size=(2, 12, 12))
    psi = SpinorField(LAT, raw / np.linalg.norm(raw))
    a, b = psi, SpinorField(LAT, psi.psi * np.exp(1.2j))
    for n in range(5):
        a = step(w, a, n * w.dt, base)
        b = step(w, b, n * w.dt, tf)
    assert np.max(np.abs(a.density() - b.density())) < 1e-14


def test_constant_substeps_matches_general(rng):
    p0, p1 = rng.normal(size=(2, 12, 12))
    phase = PhaseChange.tabulated([p0, p0, p0, p1])
    simple = simplified_transform_constant_substeps(phase, 0.0, LAT)
    assert simple.max_abs_difference(transform_deltas(phase, 0.0, LAT)) == 0.0


def test_constant_substeps_linear_in_x():
    x, _ = positions(LAT)
    phase = PhaseChange.static(0.1 * x)
    d = simplified_transform_constant_substeps(phase, 0.0, LAT)
    # away from the wrap seam the half difference is -0.1 * (left offset x)
    inner = (slice(None), slice(3, 9), slice(3, 9))
    np.testing.assert_allclose(d.xi[inner][0], -0.1 * 1.0, atol=1e-12)
    np.testing.assert_allclose(d.xi[inner][1], -0.1 * 0.5, atol=1e-12)
    np.testing.assert_allclose(d.xi[inner][2], +0.1 * 0.5, atol=1e-12)


def test_constant_substeps_zero_and_violation(rng):
    d = simplified_transform_constant_substeps(PhaseChange.zero(), 0.0, LAT)
    assert not d.alpha.any() and not d.xi.any()
    with pytest.raises(ValueError):
        simplified_transform_constant_substeps(PhaseChange.random(rng, LAT, 2), 0.0, LAT)


def test_linear_interpolation_matches_general(rng):
    s, e = rng.normal(size=(2, 12, 12))
    d = simplified_transform_linear_interpolation(s, e, LAT)
    ref = transform_deltas(PhaseChange.linear(s, e, 3.0), 3.0, LAT)
    assert d.max_abs_difference(ref) < 1e-14


def test_linear_interpolation_special_cases():
    z = simplified_transform_linear_interpolation(0.0, 0.0, LAT)
    assert not z.alpha.any() and not z.xi.any()
    d = simplified_transform_linear_interpolation(0.3, 0.9, LAT)
    assert np.max(np.abs(d.xi)) < 1e-15
    np.testing.assert_allclose(d.alpha, 0.2, atol=1e-15)


def test_continuum_potential_examples():
    z = potential_from_angles([0, 0, 0], [0, 0, 0])
    assert (z.A0, z.A1, z.A2) == (0, 0, 0)
    ex, ey = 0.3, -0.7
    p = potential_from_angles([0, 0, 0], [0, (-3 * ex + S3 * ey) / 2, (3 * ex + S3 * ey) / 2])
    assert (p.A1, p.A2) == pytest.approx((ex, -ey))
    assert potential_from_angles([0.4] * 3, [0, 0, 0]).A0 == pytest.approx(0.8)


def test_continuum_potential_scales_with_epsilon():
    p = potential_from_angles([0.1, 0.1, 0.1], [0, 0, 0], epsilon=0.5)
    assert p.A0 == pytest.approx(0.4)


@pytest.mark.parametrize("form", ["momentum-shift", "literal-ramp"])
def test_field_forms_share_potential(form):
    cfg = UniformElectricField(0.25, 0.4, form=form)
    pot = continuum_potential(cfg, LAT, t=cfg.dt)   # one step: tau = 1
    assert float(np.mean(pot.A1)) == pytest.approx(0.25)
    assert float(np.mean(pot.A2)) == pytest.approx(-0.4)


def test_uniform_config_zero_field_is_free():
    cfg = uniform_electric_config(ElectricField(0.0, 0.0))
    for slot in (1, 2, 3):
        assert cfg.angles(slot, 30.0, LAT) == (0.0, 0.0, 0.0)
    assert FreeField().angles(2, 1.0, LAT) == (0.0, 0.0, 0.0)


def test_uniform_config_literal_static_values():
    cfg = UniformElectricField(1.0, 0.0, form="literal-static")
    assert [cfg.angles(s, 99.0, LAT)[1] for s in (1, 2, 3)] == pytest.approx([0.0, -1.5, 1.5])
    with pytest.raises(ValueError):
        UniformElectricField(1.0, 0.0, form="other")


def test_uniform_field_translation_invariance(rng):
    w = build_walk(WalkKind.THREE_STEP_EQUILATERAL)
    cfg = UniformElectricField(0.1, 0.05)
    lat = LatticeSpec(Family.EQUILATERAL, 16, 16)
    idx = translate_index(lat, 3, 5)
    a = SpinorField.localized(lat, SiteIndex(4, 4))
    b = SpinorField(lat, a.psi.reshape(2, -1)[:, idx].reshape(a.psi.shape))
    for n in range(8):
        a = step(w, a, n * w.dt, cfg)
        b = step(w, b, n * w.dt, cfg)
    np.testing.assert_array_equal(a.density().ravel()[idx], b.density().ravel())


def _symmetric_packet_evolution(field_cfg, steps=12):
    lat = LatticeSpec(Family.EQUILATERAL, 64, 64)
    w = build_walk(WalkKind.THREE_STEP_EQUILATERAL)
    # Gaussian centred on a site, identical in both components: symmetric under y -> -y
    x, y = positions(lat)
    env = np.exp(-((x - 48) ** 2 + (y - 32 * S3 / 2) ** 2) / 18.0)
    f = SpinorField(lat, np.stack([env, env]) / np.sqrt(2 * np.sum(env ** 2)))
    for n in range(steps):
        f = step(w, f, n * w.dt, field_cfg)
    return f.density()


def _y_asymmetry(rho):
    ymarg = rho.sum(axis=1)
    return np.max(np.abs(ymarg[12:32] - ymarg[52:32:-1]))


def test_free_walk_keeps_y_symmetry():
    assert _y_asymmetry(_symmetric_packet_evolution(None)) < 1e-10


@pytest.mark.xfail(strict=True, reason="the free y-symmetry is not a reflection of the coin sequence; "
                                       "an x field breaks it (asymmetry ~1e-2 for both field forms)")
@pytest.mark.parametrize("form", ["momentum-shift", "literal-ramp"])
def test_x_field_keeps_y_symmetry(form):
    assert _y_asymmetry(_symmetric_packet_evolution(UniformElectricField(0.1, 0.0, form=form))) < 1e-10


def test_tabulated_field_validation(rng):
    with pytest.raises(ValueError):
        TabulatedField(np.zeros((2, 3, 2, 4, 4)))
    t = random_tables(rng, 2)
    with pytest.raises(ValueError):
        t.angles(1, 0.0, LatticeSpec(Family.EQUILATERAL, 4, 4))
    with pytest.raises(ValueError):
        t.angles(4, 0.0, LAT)
    # times past the table reuse the last step
    np.testing.assert_array_equal(t.angles(1, 100.0, LAT)[1], t.tables[-1, 0, 1])


@pytest.mark.parametrize("cfg", [UniformElectricField(0.1, -0.2, form="literal-ramp"), FreeField()])
def test_json_round_trip(tmp_path, cfg):
    save_field(cfg, tmp_path / "f.json")
    doc = json.loads((tmp_path / "f.json").read_text())
    assert doc["format"] == "diracwalk-field" and doc["version"] == 1 and doc["type"] == "uniform_electric"
    back = load_field(tmp_path / "f.json")
    assert field_to_dict(back) == field_to_dict(cfg)


def test_json_tabulated_round_trip(rng, tmp_path):
    t = random_tables(rng, 2, LatticeSpec(Family.EQUILATERAL, 4, 4))
    back = field_from_dict(json.loads(json.dumps(field_to_dict(t))))
    np.testing.assert_array_equal(back.tables, t.tables)


@pytest.mark.parametrize("doc", [{"format": "other", "type": "tabulated"}, {"type": "magnetic"},
                                 {"type": "uniform_electric", "version": 99}])
def test_json_rejects_bad_documents(doc):
    with pytest.raises(ValueError):
        field_from_dict(doc)


def test_transformed_field_not_serializable(rng):
    with pytest.raises(TypeError):
        field_to_dict(gauge_transform(FreeField(), PhaseChange.zero()))

import cmath
import math

import numpy as np
import pytest

from conftest import UNIT_WAVE, random_scenario
from irs_tiles import (
    AnglePair,
    AngleTriple,
    ArrayGeometry,
    ChannelScenario,
    Codebook,
    ConfigurationError,
    DirectPath,
    IncidentPath,
    IrsLayout,
    ModeSelection,
    OutgoingPath,
    TileSpec,
    TransmissionMode,
    WaveSpec,
    apply_channel,
    assemble_G,
    continuous_tile_response,
    end_to_end_matrix,
    link_budget_ratio,
    required_irs_area,
    steering_vector,
    tile_translated_response,
)
from irs_tiles.channel import free_space_amplitude, matrix_to_csv_rows, receiver_noise
from irs_tiles.geometry import spherical_unit_vector


def random_selection(rng, scenario):
    return ModeSelection(tuple(int(m) for m in rng.integers(0, scenario.n_modes, scenario.n_tiles)))


def test_steering_examples():
    np.testing.assert_array_equal(steering_vector(ArrayGeometry.single(), (0.3, 0.4, 0.866)), [1])
    ula = ArrayGeometry.uniform_linear(2, 0.5)
    np.testing.assert_allclose(steering_vector(ula, (0, 0, 1)), [1, 1], atol=1e-15)
    np.testing.assert_allclose(steering_vector(ula, (1, 0, 0)), [1, -1], atol=1e-15)


def test_array_validation():
    with pytest.raises(ValueError):
        ArrayGeometry(())
    with pytest.raises(ValueError):
        ArrayGeometry(((0.0, 0.0),))
    with pytest.raises(ValueError):
        ArrayGeometry(((0.0, math.inf, 0.0),))


def single_link_scenario(tiles, modes, psi_t, psi_r, gains=(1.0, 1.0), direct=()):
    layout = IrsLayout(tiles, UNIT_WAVE)
    one = ArrayGeometry.single()
    return ChannelScenario(
        (one,), (one,), layout, Codebook(modes),
        direct={(0, 0): direct},
        incident={0: (IncidentPath(0.0, 0.0, psi_t, gains[0]),)},
        outgoing={0: (OutgoingPath(psi_r, 0.0, 0.0, gains[1]),)},
    )


def test_assemble_single_term():
    psi_t, psi_r = AngleTriple(0.2, 0.5, 0.1), AnglePair(0.6, 3.0)
    mode = TransmissionMode(0.1, -0.2)
    sc = single_link_scenario((TileSpec(3, 3, 0.8),), (mode,), psi_t, psi_r)
    G = assemble_G(0, 0, ModeSelection((0,)), sc)
    assert G.shape == (1, 1)
    assert G[0, 0] == continuous_tile_response(psi_t, psi_r, mode, TileSpec(3, 3, 0.8), UNIT_WAVE)


def test_assemble_two_coherent_tiles_double():
    # at normal incidence and reflection the translation phase vanishes
    psi_t, psi_r = AngleTriple(0, 0, 0.3), AnglePair(0, 0)
    mode = TransmissionMode(0.05)
    one = single_link_scenario((TileSpec(2, 2),), (mode,), psi_t, psi_r)
    two = single_link_scenario((TileSpec(2, 2), TileSpec(2, 2, K_x=1)), (mode,), psi_t, psi_r)
    G1 = assemble_G(0, 0, ModeSelection((0,)), one)
    G2 = assemble_G(0, 0, ModeSelection((0, 0)), two)
    np.testing.assert_array_equal(G2, 2 * G1)


def test_assemble_matches_triple_loop(rng):
    for _ in range(10):
        sc = random_scenario(rng, n_tiles=2, n_modes=3, n_tx=1, n_rx=1, max_paths=2)
        sel = random_selection(rng, sc)
        inc, out = sc.incident_paths(0), sc.outgoing_paths(0)
        naive = np.zeros((len(out), len(inc)), dtype=complex)
        for r in range(len(out)):
            for t in range(len(inc)):
                for n in range(sc.n_tiles):
                    naive[r, t] += tile_translated_response(n, sel[n], inc[t].irs, out[r].irs,
                                                            sc.layout, sc.codebook)
        np.testing.assert_allclose(assemble_G(0, 0, sel, sc), naive, rtol=1e-12, atol=0)


def test_selection_validation(rng):
    sc = random_scenario(rng, n_tiles=2, n_modes=2)
    with pytest.raises(ConfigurationError):
        assemble_G(0, 0, ModeSelection((0,)), sc)
    with pytest.raises(ConfigurationError):
        assemble_G(0, 0, ModeSelection((0, 2)), sc)


def test_one_hot_equivalence(rng):
    sc = random_scenario(rng, n_tiles=3, n_modes=3)
    sel = random_selection(rng, sc)
    s = sel.one_hot(sc.n_modes)
    assert s.shape == (3, 3)
    np.testing.assert_array_equal(s.sum(axis=1), 1)
    inc, out = sc.incident_paths(0), sc.outgoing_paths(1)
    G = np.zeros((len(out), len(inc)), dtype=complex)
    for n in range(sc.n_tiles):
        for m in range(sc.n_modes):
            if s[n, m]:
                G += np.array([[tile_translated_response(n, m, p.irs, o.irs, sc.layout, sc.codebook)
                                for p in inc] for o in out])
    np.testing.assert_array_equal(assemble_G(1, 0, sel, sc), G)


def test_tile_subset_linearity(rng):
    sc = random_scenario(rng, n_tiles=4, n_modes=2)
    sel = random_selection(rng, sc)
    full = assemble_G(0, 0, sel, sc)
    parts = []
    for subset in ((0, 1), (2, 3)):
        layout = IrsLayout(tuple(sc.layout.tiles[n] for n in subset), sc.layout.wave, sc.layout.lattice)
        sub = ChannelScenario(sc.transmitters, sc.receivers, layout, sc.codebook,
                              sc.direct, sc.incident, sc.outgoing)
        parts.append(assemble_G(0, 0, ModeSelection(tuple(sel[n] for n in subset)), sub))
    np.testing.assert_allclose(parts[0] + parts[1], full, rtol=1e-14, atol=1e-14 * np.abs(full).max())


def dense_oracle(j, i, sel, sc):
    """H built from explicit loops over antennas and paths."""
    rx, tx = sc.receivers[j], sc.transmitters[i]
    H = np.zeros((len(rx), len(tx)), dtype=complex)
    for a, pr in enumerate(rx.element_positions):
        for b, pt in enumerate(tx.element_positions):
            for p in sc.direct_paths(j, i):
                u_r = spherical_unit_vector(p.aoa_theta, p.aoa_phi)
                u_t = spherical_unit_vector(p.aod_theta, p.aod_phi)
                H[a, b] += (cmath.exp(2j * math.pi * np.dot(u_r, pr)) * p.gain
                            * cmath.exp(-2j * math.pi * np.dot(u_t, pt)))
            for o in sc.outgoing_paths(j):
                for p in sc.incident_paths(i):
                    g = sum(tile_translated_response(n, sel[n], p.irs, o.irs, sc.layout, sc.codebook)
                            for n in range(sc.n_tiles))
                    u_r = spherical_unit_vector(o.aoa_theta, o.aoa_phi)
                    u_t = spherical_unit_vector(p.aod_theta, p.aod_phi)
                    H[a, b] += (cmath.exp(2j * math.pi * np.dot(u_r, pr)) * o.gain * g * p.gain
                                * cmath.exp(-2j * math.pi * np.dot(u_t, pt)))
    return H


@pytest.mark.parametrize("discrete", [False, True])
def test_end_to_end_dense_oracle(rng, discrete):
    for _ in range(5):
        sc = random_scenario(rng, n_tiles=2, n_modes=2, n_tx=2, n_rx=2, discrete=discrete)
        sel = random_selection(rng, sc)
        for j in range(2):
            for i in range(2):
                H = end_to_end_matrix(j, i, sel, sc)
                assert H.shape == (len(sc.receivers[j]), len(sc.transmitters[i]))
                ref = dense_oracle(j, i, sel, sc)
                np.testing.assert_allclose(H, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


def test_end_to_end_shapes_random(rng):
    for _ in range(20):
        sc = random_scenario(rng, int(rng.integers(1, 4)), 2, int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        sel = random_selection(rng, sc)
        for j, rx in enumerate(sc.receivers):
            for i, tx in enumerate(sc.transmitters):
                assert end_to_end_matrix(j, i, sel, sc).shape == (len(rx), len(tx))


def test_end_to_end_direct_only():
    one = ArrayGeometry.uniform_linear(2)
    d = DirectPath(0.3, 0.0, 0.5, 1.0, 0.5 - 0.2j)
    sc = ChannelScenario((one,), (one,), IrsLayout((TileSpec(1, 1),), UNIT_WAVE), Codebook((TransmissionMode(0),)),
                         direct={(0, 0): (d,)}, incident={0: ()}, outgoing={0: ()})
    H = end_to_end_matrix(0, 0, ModeSelection((0,)), sc)
    a = steering_vector(one, spherical_unit_vector(0.5, 1.0))
    b = steering_vector(one, spherical_unit_vector(0.3, 0.0))
    np.testing.assert_allclose(H, d.gain * np.outer(a, b.conj()), rtol=1e-14)


def test_end_to_end_scalar_hand_value():
    psi_t, psi_r = AngleTriple(0, 0, 0), AnglePair(0.4, 0.0)
    mode = TransmissionMode(-0.1)
    sc = single_link_scenario((TileSpec(2, 2),), (mode,), psi_t, psi_r)
    H = end_to_end_matrix(0, 0, ModeSelection((0,)), sc)
    g = continuous_tile_response(psi_t, psi_r, mode, TileSpec(2, 2), UNIT_WAVE)
    assert H.shape == (1, 1)
    assert H[0, 0] == pytest.approx(g, rel=1e-14)


def test_missing_path_sets_raise():
    one = ArrayGeometry.single()
    sc = ChannelScenario((one,), (one,), IrsLayout((TileSpec(1, 1),), UNIT_WAVE), Codebook((TransmissionMode(0),)),
                         direct={}, incident={0: ()}, outgoing={0: ()})
    with pytest.raises(ConfigurationError):
        end_to_end_matrix(0, 0, ModeSelection((0,)), sc)
    sc = ChannelScenario((one,), (one,), IrsLayout((TileSpec(1, 1),), UNIT_WAVE), Codebook((TransmissionMode(0),)),
                         direct={(0, 0): ()}, incident={}, outgoing={0: ()})
    with pytest.raises(ConfigurationError):
        end_to_end_matrix(0, 0, ModeSelection((0,)), sc)


def test_scenario_validation():
    one = ArrayGeometry.single()
    layout, cb = IrsLayout((TileSpec(1, 1),), UNIT_WAVE), Codebook((TransmissionMode(0),))
    with pytest.raises(ConfigurationError):
        ChannelScenario((one,), (one,), layout, cb, noise_variance=-1.0)
    with pytest.raises(ConfigurationError):
        ChannelScenario((one,), (one,), layout, cb, direct={(1, 0): ()})
    with pytest.raises(ConfigurationError):
        ChannelScenario((one,), (one,), layout, cb,
                        direct={(0, 0): (DirectPath(0, 0, 0, 0, complex(math.nan, 0)),)})


def test_apply_channel_noiseless(rng):
    sc = random_scenario(rng, 2, 2, n_tx=2, n_rx=2)
    sel = random_selection(rng, sc)
    xs = [rng.normal(size=len(t)) + 1j * rng.normal(size=len(t)) for t in sc.transmitters]
    ys = apply_channel(sel, sc, xs)
    for j, y in enumerate(ys):
        ref = sum(end_to_end_matrix(j, i, sel, sc) @ xs[i] for i in range(2))
        np.testing.assert_allclose(y, ref, rtol=1e-14, atol=1e-14)


def test_apply_channel_superposition(rng):
    sc = random_scenario(rng, 2, 2, n_tx=2, n_rx=2)
    sel = random_selection(rng, sc)
    x1 = [rng.normal(size=len(t)) + 0j for t in sc.transmitters]
    x2 = [1j * rng.normal(size=len(t)) for t in sc.transmitters]
    y1, y2 = apply_channel(sel, sc, x1), apply_channel(sel, sc, x2)
    y12 = apply_channel(sel, sc, [a + b for a, b in zip(x1, x2)])
    for a, b, c in zip(y1, y2, y12):
        np.testing.assert_allclose(a + b, c, rtol=1e-12, atol=1e-12)


def test_apply_channel_dimension_errors(rng):
    sc = random_scenario(rng, 1, 1, n_tx=1, n_rx=1)
    sel = ModeSelection((0,))
    with pytest.raises(ConfigurationError):
        apply_channel(sel, sc, [])
    with pytest.raises(ConfigurationError):
        apply_channel(sel, sc, [np.zeros(len(sc.transmitters[0]) + 1)])


def test_noise_deterministic_and_keyed():
    a = receiver_noise(7, 0, 0, 5, 0.3)
    np.testing.assert_array_equal(a, receiver_noise(7, 0, 0, 5, 0.3))
    assert not np.array_equal(a, receiver_noise(7, 1, 0, 5, 0.3))
    assert not np.array_equal(a, receiver_noise(7, 0, 1, 5, 0.3))
    assert not np.array_equal(a, receiver_noise(8, 0, 0, 5, 0.3))


def test_noise_variance_estimate(rng):
    sc = random_scenario(rng, 1, 1, n_tx=1, n_rx=1)
    big = ArrayGeometry(tuple((0.0, 0.0, 0.5 * l) for l in range(100_000)))
    sc = ChannelScenario(sc.transmitters, (big,), sc.layout, sc.codebook,
                         {(0, 0): ()}, sc.incident, {0: ()}, noise_variance=0.25, rng_seed=3)
    (y,) = apply_channel(ModeSelection((0,)), sc, [np.zeros(len(sc.transmitters[0]))])
    assert abs(np.mean(np.abs(y) ** 2) / 0.25 - 1) < 0.02
    assert abs(np.mean(y.real**2) - np.mean(y.imag**2)) < 0.02 * 0.25
    (y2,) = apply_channel(ModeSelection((0,)), sc, [np.zeros(len(sc.transmitters[0]))])
    np.testing.assert_array_equal(y, y2)


def test_link_budget_examples():
    wave = WaveSpec(299_792_458.0 / 5e9)
    area = required_irs_area(200, 100, 100, wave)
    assert link_budget_ratio(200, 100, 100, area, wave) == pytest.approx(1.0, rel=1e-12)
    cells = area / (0.5 * wave.wavelength) ** 2
    assert cells == pytest.approx(3300, rel=0.05)
    assert link_budget_ratio(200, 100, 100, 0.0, wave) == 0.0
    r1 = link_budget_ratio(200, 100, 100, 0.7, wave)
    assert link_budget_ratio(200, 100, 100, 1.4, wave) == pytest.approx(4 * r1, rel=1e-14)
    with pytest.raises(ValueError):
        link_budget_ratio(0, 100, 100, 1.0, wave)


def test_free_space_amplitude():
    assert free_space_amplitude(1.0) == pytest.approx(1 / math.sqrt(4 * math.pi))
    with pytest.raises(ValueError):
        free_space_amplitude(0.0)


def test_matrix_csv_rows():
    rows = matrix_to_csv_rows(np.array([[1 + 2j, complex(0.0, -0.5)]]))
    assert rows == [["1.0", "2.0", "0.0", "-0.5"]]

import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hsad.errors import ParameterError
from hsad.synth import BORDER, SynthSpec, generate_scene, spectral_angle, synthesize


def test_default_desk_spec():
    cube, mask = generate_scene()
    assert (cube.height, cube.width, cube.bands) == (60, 60, 50)
    assert mask.anomaly_count == 20
    assert mask.shape == (60, 60)


def test_zero_anomalies_gives_empty_mask():
    _, mask = generate_scene(SynthSpec(anomaly_count=0))
    assert mask.anomaly_count == 0


def test_noise_free_single_class_has_two_spectra():
    spec = SynthSpec(height=12, width=12, bands=8, num_background_classes=1, anomaly_count=1,
                     noise_sigma=0.0, background_gradient=0.0)
    cube, mask = generate_scene(spec)
    pixels = cube.values.reshape(8, -1).T
    assert len(np.unique(pixels, axis=0)) == 2
    assert mask.anomaly_count == 1


def test_same_seed_bit_identical():
    a, b = generate_scene(SynthSpec(seed=9)), generate_scene(SynthSpec(seed=9))
    assert a[0].values.tobytes() == b[0].values.tobytes()
    assert a[1].labels.tobytes() == b[1].labels.tobytes()
    c = generate_scene(SynthSpec(seed=10))
    assert a[0].values.tobytes() != c[0].values.tobytes()


@given(
    st.integers(0, 2**32 - 1),
    st.integers(2, 4),
    st.floats(0.01, 1.5),
    st.integers(6, 30),
)
def test_anomaly_angle_to_every_endmember(seed, classes, contrast, bands):
    spec = SynthSpec(height=16, width=16, bands=bands, num_background_classes=classes,
                     anomaly_count=5, anomaly_contrast=contrast, seed=seed)
    scene = synthesize(spec)
    for k in range(classes):
        assert spectral_angle(scene.anomaly_spectrum, scene.endmembers[:, k]) >= contrast - 1e-12
    # Implanted pixels are the anomaly spectrum times the illumination, so their
    # angle to every endmember is the same (pre-noise).
    rows, cols = np.nonzero(scene.mask.labels)
    for r, c in zip(rows, cols):
        clean = scene.clean[:, r, c]
        for k in range(classes):
            assert spectral_angle(clean, scene.endmembers[:, k]) >= contrast - 1e-9


@given(st.integers(0, 2**32 - 1), st.integers(0, 30))
def test_census_and_border(seed, count):
    spec = SynthSpec(height=20, width=20, bands=6, anomaly_count=count, seed=seed)
    _, mask = generate_scene(spec)
    assert mask.anomaly_count == count
    assert count / 400 < 0.1
    border = np.ones((20, 20), dtype=bool)
    border[BORDER:-BORDER, BORDER:-BORDER] = False
    assert not mask.labels[border].any()


def test_spec_validation():
    for kwargs in (
        {"anomaly_count": 360},  # 10% of 60x60
        {"anomaly_count": -1},
        {"anomaly_contrast": 0.0},
        {"anomaly_contrast": float("nan")},
        {"noise_sigma": -0.1},
        {"background_gradient": -1.0},
        {"bands": 0},
        {"seed": -1},
    ):
        with pytest.raises(ParameterError):
            SynthSpec(**kwargs)


def test_infeasible_contrast():
    with pytest.raises(ParameterError):
        generate_scene(SynthSpec(bands=3, num_background_classes=3))
    with pytest.raises(ParameterError):
        generate_scene(SynthSpec(anomaly_contrast=2.0))


def test_gradient_controls_illumination_spread():
    flat = synthesize(SynthSpec(background_gradient=0.0, noise_sigma=0.0, anomaly_count=0))
    shaded = synthesize(SynthSpec(background_gradient=0.8, noise_sigma=0.0, anomaly_count=0))
    norm = lambda s: np.linalg.norm(s.clean, axis=0)  # noqa: E731
    assert norm(shaded).std() / norm(shaded).mean() > 2 * norm(flat).std() / norm(flat).mean()


def test_spec_is_frozen():
    with pytest.raises(dataclasses.FrozenInstanceError):
        SynthSpec().seed = 1

import json

import numpy as np
import pytest

from ladder_cooling import ScanResult, read_csv


def sample():
    return ScanResult("delta_w", "MHz", np.array([-1.0, 0.0, 1.0]),
                      {"p_g": np.array([0.5, 0.25, 1.0]), "p_m": np.array([0.25, 0.5, 0.0]),
                       "p_e": np.array([0.25, 0.25, 0.0])},
                      {"omega_w_mhz": 0.1, "ion": "Ca+"}, {})


def test_csv_roundtrip(tmp_path):
    res = sample()
    path = tmp_path / "out.csv"
    text = res.to_csv(path)
    assert path.read_text() == text
    assert text.splitlines()[0] == "# ion = \"Ca+\""
    assert "delta_w [MHz],p_g,p_m,p_e" in text
    back = read_csv(path)
    assert back.name == "delta_w" and back.unit == "MHz"
    assert np.allclose(back.columns["p_e"], res.columns["p_e"])
    assert back.fixed["omega_w_mhz"] == 0.1
    assert read_csv(text).header() == res.header()


def test_twelve_significant_digits():
    res = ScanResult("x", "", np.array([1 / 3]), {"y": np.array([2 / 3])})
    last = res.to_csv().splitlines()[-1]
    assert last == "0.333333333333,0.666666666667"


def test_json_layout():
    doc = json.loads(sample().to_json())
    assert set(doc) == {"meta", "data"}
    assert doc["meta"]["abscissa"] == {"name": "delta_w", "unit": "MHz"}
    assert doc["data"]["p_m"] == [0.25, 0.5, 0.0]
    assert doc["meta"]["fixed"]["ion"] == "Ca+"


def test_rescaled():
    res = sample().rescaled(10.0, "kHz")
    assert res.unit == "kHz" and res.abscissa[0] == -10.0


@pytest.mark.parametrize("abscissa", [[0.0, 0.0, 1.0], [0.0, 2.0, 1.0], []])
def test_monotone_abscissa_required(abscissa):
    with pytest.raises(ValueError):
        ScanResult("x", "", np.array(abscissa), {})


def test_column_length_checked():
    with pytest.raises(ValueError):
        ScanResult("x", "", np.arange(3.0), {"y": np.arange(2.0)})


def test_population_checks():
    with pytest.raises(ValueError):
        ScanResult("x", "", np.arange(2.0), {"p_e": np.array([0.5, 1.5])})
    with pytest.raises(ValueError):
        ScanResult("x", "", np.arange(1.0), {"p_g": [0.5], "p_m": [0.4], "p_e": [0.2]})


def test_single_point_allowed():
    assert len(ScanResult("x", "", np.array([1.0]), {"y": np.array([2.0])})) == 1

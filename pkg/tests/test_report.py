import json

import numpy as np
import pytest

from geoment.core import DensityMatrix, random_density
from geoment.families import MaxCorrSpec, make_maxcorr, make_mes
from geoment.report import MeasureEntry, build_report, check_hierarchy, recompute, render


@pytest.fixture(scope="module")
def bell_report():
    return build_report(make_mes(2))


def test_bell(bell_report):
    r = bell_report
    assert r.value("G_fc") == pytest.approx(0.5, abs=1e-9)
    assert r.value("G_m") == pytest.approx(0.5, abs=1e-9)
    for name in ("G_f_log", "G_c_log", "G_m_log"):
        assert r.value(name) == pytest.approx(1.0, abs=1e-9)
    assert r.get("G_fc").kind == "exact"
    assert r.get("E_T").upper <= r.value("G_t") + 1e-12
    assert r.value("G_t") == pytest.approx(0.5, abs=1e-9)
    assert r.value("S") == pytest.approx(0, abs=1e-12)
    assert not r.violations


def test_maximally_mixed():
    r = build_report(DensityMatrix.from_matrix((2, 2), np.eye(4) / 4))
    assert r.value("G_fc") == pytest.approx(0, abs=1e-9)
    assert r.value("G_m") == pytest.approx(0.75, abs=1e-9)
    assert r.value("G_m_log") == pytest.approx(2.0, abs=1e-9)
    assert r.value("S") == pytest.approx(2.0)
    assert r.get("G_fc").kind == "upper-bound"
    assert "G_fc[closed]" in r.names()


def test_maxcorr_d1_pattern():
    r = build_report(make_maxcorr(MaxCorrSpec.rank2(1, 3, 0.5)))
    assert r.value("G_f_log[closed]") < r.value("G_c_log") - 1e-3
    assert r.value("G_c_log") < r.value("G_m_log") - 1e-3
    assert r.value("G_c_log") == pytest.approx(r.value("G_c_log[closed]"), abs=1e-5)
    assert not r.violations


def test_certificates_recompute():
    rho = random_density((2, 2), np.random.default_rng(11), 3)
    r = build_report(rho)
    checked = 0
    for e in r.entries:
        val = recompute(e, rho)
        if val is None:
            continue
        assert val == pytest.approx(e.certified, abs=1e-8), e.name
        checked += 1
    assert checked == 7
    assert not r.violations


def test_hierarchy_check_catches_violation(bell_report):
    bad = list(bell_report.entries)
    i = bell_report.names().index("G_t")
    bad[i] = MeasureEntry("G_t", 0.9, "upper-bound", "test")
    rep = type(bell_report)(bell_report.dims, bad)
    assert any("G_t" in v for v in check_hierarchy(rep))


def test_render(bell_report):
    text = render(bell_report)
    assert text.splitlines()[0] == "dims [2, 2]"
    assert "0.5 " in text
    doc = json.loads(render(bell_report, "machine"))
    assert {m["name"] for m in doc["measures"]} >= {"G_fc", "G_m", "E_T"}
    assert render(bell_report) == render(build_report(make_mes(2)))

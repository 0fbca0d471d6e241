"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from skmzbf import GaussianLayer, gen_blob_dataset


def triangle_layer(radius=0.6, sigma=0.75):
    """Three centers on a circle around the blob, one per lobe of the default boundary."""
    ang = np.pi / 6 + 2 * np.pi * np.arange(3) / 3
    return GaussianLayer(radius * np.column_stack([np.cos(ang), np.sin(ang)]), sigma)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def blob():
    data, scene = gen_blob_dataset(seed=0)
    return data, scene


@pytest.fixture
def tri_layer():
    return triangle_layer()


@pytest.fixture
def two_center_layer():
    return GaussianLayer([[0.0, 0.0], [1.0, 0.0]], 1.0)


# ---------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion in the terminal summary

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.fixture
def measured(request):
    """Record key measurements of an acceptance criterion for the summary line."""
    marker = request.node.get_closest_marker("criterion")
    entry = _CRITERIA.setdefault(marker.args[0], {"title": marker.args[1], "notes": []})
    return entry["notes"].append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not rep.failed:
        return
    entry = _CRITERIA.setdefault(marker.args[0], {"title": marker.args[1], "notes": []})
    entry["passed"] = rep.passed and entry.get("passed", True)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry.get("passed") else "FAIL"
        notes = "; ".join(entry["notes"])
        terminalreporter.write_line(f"criterion {number:2d} {status}  {entry['title']}"
                                    + (f"  [{notes}]" if notes else ""))

from __future__ import annotations

import json
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def cases20():
    from mooddx.corpus import load_cases

    return load_cases(FIXTURES / "cases20.jsonl")


@pytest.fixture(scope="session")
def history200():
    from mooddx.corpus import load_cases

    return load_cases(FIXTURES / "history200.jsonl")


@pytest.fixture(scope="session")
def script20() -> dict:
    return json.loads((FIXTURES / "script20.json").read_text())


@pytest.fixture(scope="session")
def resources(history200):
    """Agent resources with history stores; shared read-only."""
    from mooddx.agents import build_resources
    from mooddx.knowledge_base import default_kb
    from mooddx.providers import HashingEmbedder
    from mooddx.retrieval import build_record_store, build_scale_store
    from mooddx.scales import default_selected_items

    emb = HashingEmbedder()
    sel = default_selected_items()
    return build_resources(
        default_kb(), emb, sel,
        record_store=build_record_store(history200, emb, "structured"),
        scale_store=build_scale_store(history200, emb, sel),
    )


@pytest.fixture(scope="session")
def moodsyn_real():
    from mooddx.moodsyn import read_table

    return read_table(FIXTURES / "moodsyn_real.csv")


@pytest.fixture(scope="session")
def moodsyn_test():
    from mooddx.moodsyn import read_table

    return read_table(FIXTURES / "moodsyn_test.csv")


# ---------------------------------------------------------------- acceptance summary

_CRITERIA: list[tuple[int, str, str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        detail = ""
        if rep.skipped and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2]
        elif rep.failed:
            detail = str(rep.longrepr).strip().splitlines()[-1][:160]
        _CRITERIA.append((number, title, status, detail))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test checks")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(_CRITERIA):
        line = f"criterion {number}: {status} {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))

import datetime as dt
import json
from pathlib import Path

import pytest

from polyframe.corpus import Article

FIXTURES = Path(__file__).parent / "fixtures"


def make_article(aid="a1", body="Some text.", language="ru", date=dt.date(2020, 1, 1), **kw):
    return Article(aid, language, date, kw.pop("outlet", "outlet"), body, **kw)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write((r if isinstance(r, str) else json.dumps(r, ensure_ascii=False)) + "\n")
    return path


@pytest.fixture(scope="session")
def synthetic_world(tmp_path_factory):
    """The bundled synthetic corpus, generated once per test session."""
    from polyframe.synthetic import generate

    root = tmp_path_factory.mktemp("world")
    config = generate(root)
    return root, config


def brute_force_alpha(units):
    """Nominal alpha from explicit value pairs; ``units`` is a list of label lists (None = missing)."""
    pairable = [[v for v in u if v is not None] for u in units]
    pairable = [u for u in pairable if len(u) >= 2]
    values = [v for u in pairable for v in u]
    n = len(values)
    observed = sum(sum(1 for i, a in enumerate(u) for j, b in enumerate(u) if i != j and a != b) / (len(u) - 1)
                   for u in pairable) / n
    expected = sum(1 for i, a in enumerate(values) for j, b in enumerate(values)
                   if i != j and a != b) / (n * (n - 1))
    return 1.0 - observed / expected


def mace_data(seed, n_items=200, n_labels=14, thetas=(0.9, 0.85, 0.8, 0.0, 0.0)):
    """Labels sampled from the competence model itself: an annotator copies the truth
    with probability theta, else draws uniformly (theta 0 is a pure spammer)."""
    import numpy as np

    from polyframe.reliability import AnnotationMatrix

    rng = np.random.default_rng(seed)
    truth = rng.integers(0, n_labels, n_items)
    codes = np.empty((n_items, len(thetas)), dtype=np.int64)
    for j, theta in enumerate(thetas):
        copies = rng.uniform(size=n_items) < theta
        codes[:, j] = np.where(copies, truth, rng.integers(0, n_labels, n_items))
    matrix = AnnotationMatrix(tuple(range(n_items)), tuple(f"a{j}" for j in range(len(thetas))),
                              tuple(range(n_labels)), codes)
    return matrix, truth


PIPELINE = ("pair", "build-lexicons", "score", "agree", "salience", "report")


@pytest.fixture(scope="session")
def pipeline_run(synthetic_world):
    """Run the full CLI pipeline once on the synthetic corpus; returns (root, config, timings, codes)."""
    import time

    from polyframe.cli import main

    root, config = synthetic_world
    timings, codes = {}, {}
    for step in PIPELINE:
        start = time.perf_counter()
        codes[step] = main(["--config", str(config), "--workers", "1", step])
        timings[step] = time.perf_counter() - start
    return root, config, timings, codes


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

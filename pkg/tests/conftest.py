from pathlib import Path

import numpy as np
import pytest

from gaugeword.evaluation import Embedding, SimilarityTestSet

DATA = Path(__file__).resolve().parents[1] / "src" / "gaugeword" / "data"


def synthetic_embedding(seed=0, d=5, p=50):
    rng = np.random.default_rng(seed)
    words = tuple(f"w{j:02d}" for j in range(p))
    return Embedding(words, rng.standard_normal((d, p)))


def synthetic_testset(emb, seed=0, n_pairs=30, name="synth"):
    """Human scores follow cosines under a hidden stretch, plus noise."""
    rng = np.random.default_rng(seed + 1000)
    hidden = np.exp(rng.normal(0, 0.8, emb.d))[:, None] * emb.V
    seen = set()
    pairs = []
    while len(pairs) < n_pairs:
        i, j = sorted(rng.choice(len(emb.vocab), 2, replace=False))
        if (i, j) in seen:
            continue
        seen.add((i, j))
        a, b = hidden[:, i], hidden[:, j]
        c = a @ b / np.linalg.norm(a) / np.linalg.norm(b)
        pairs.append((emb.vocab[i], emb.vocab[j], round(5 + 4 * c + rng.normal(0, 0.5), 2)))
    return SimilarityTestSet(name, tuple(pairs))


@pytest.fixture
def synth():
    emb = synthetic_embedding()
    return emb, synthetic_testset(emb)


@pytest.fixture
def toy_paths():
    return DATA / "toy_embedding.txt", DATA / "toy_testset.tsv"


# -- one PASS/FAIL line per acceptance criterion --------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _criteria.setdefault(mark.args[0], {"title": mark.args[1], "outcomes": []})
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria[crit]["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        entry = _criteria[num]
        outs = entry["outcomes"]
        if not outs:
            status = "NOT RUN"
        elif "failed" in outs:
            status = "FAIL"
        elif all(o == "skipped" for o in outs):
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"{status} AC{num}: {entry['title']}")

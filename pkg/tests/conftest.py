import numpy as np
import pytest

from jroc.dataset import Dataset, FeatureMeta, bundled_path, load_dataset

# lines recorded by test_acceptance, echoed in the terminal summary so they
# survive output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_dataset(values, y, missing=None, labels=None, nominal=None, name="synthetic") -> Dataset:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    n, m = values.shape
    y = np.asarray(y, dtype=np.int64)
    c = int(y.max()) + 1
    labels = labels or tuple(f"c{k}" for k in range(max(c, 2)))
    feats = []
    for j in range(m):
        if nominal and j in nominal:
            feats.append(FeatureMeta(f"x{j + 1}", "nominal", tuple(f"v{k}" for k in range(nominal[j]))))
        else:
            feats.append(FeatureMeta(f"x{j + 1}", "numeric"))
    if missing is None:
        missing = np.zeros((n, m), dtype=bool)
    return Dataset(tuple(feats), tuple(labels), values, missing, y, "class", name)


def random_dataset(rng: np.random.Generator, n=None, m=None, c=None, p_missing=0.0, nominal=False) -> Dataset:
    n = n or int(rng.integers(12, 40))
    m = m or int(rng.integers(1, 6))
    c = c or int(rng.integers(2, 4))
    y = np.concatenate([np.arange(c), rng.integers(0, c, n - c)])
    centers = rng.normal(size=(c, m)) * 2
    values = centers[y] + rng.normal(size=(n, m))
    nom = {}
    if nominal and m > 1:
        values[:, 0] = rng.integers(0, 3, n)
        nom = {0: 3}
    missing = rng.random((n, m)) < p_missing
    return make_dataset(np.round(values, 3), y, missing, nominal=nom)


@pytest.fixture(scope="session")
def iris():
    return load_dataset(bundled_path("iris"))


@pytest.fixture(scope="session")
def diabetes():
    return load_dataset(bundled_path("diabetes"))

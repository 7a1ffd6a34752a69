import numpy as np
import pytest

from incfs import IncompleteDataset

from pathlib import Path

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def wine_path():
    path = DATA_DIR / "wine.csv"
    if not path.exists():
        pytest.skip("data/wine.csv not present")
    return path


@pytest.fixture(scope="session")
def wine(wine_path):
    from incfs import load_csv
    return load_csv(wine_path, "class")


def random_incomplete(n, d, missing, seed, n_classes=2):
    """Random dataset in [0,1] with `missing` masked cells and row coverage."""
    rng = np.random.default_rng(seed)
    values = rng.random((n, d))
    mask = np.ones((n, d), dtype=bool)
    cells = [(i, j) for i in range(n) for j in range(d)]
    rng.shuffle(cells)
    dropped = 0
    for i, j in cells:
        if dropped == missing:
            break
        if mask[i].sum() > 1:
            mask[i, j] = False
            dropped += 1
    labels = rng.integers(0, n_classes, size=n)
    labels[:n_classes] = np.arange(n_classes)  # every class present
    return IncompleteDataset(values, mask, labels)


@pytest.fixture
def tiny_csv(tmp_path):
    """Small complete two-class dataset for CLI-level tests."""
    rng = np.random.default_rng(7)
    path = tmp_path / "tiny.csv"
    lines = ["a,b,c,d,class"]
    for i in range(24):
        label = i % 2
        row = rng.random(4) + label * 0.8
        lines.append(",".join(f"{x:.6f}" for x in row) + f",{label}")
    path.write_text("\n".join(lines) + "\n")
    return path

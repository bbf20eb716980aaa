from pathlib import Path

import numpy as np
import pytest

from stabdef.table import FormulaTable

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


def random_table(rng, boolean, max_rows=6, max_cols=6, min_dim=2):
    r = int(rng.integers(min_dim, max_rows + 1))
    c = int(rng.integers(min_dim, max_cols + 1))
    if boolean:
        vals = rng.integers(0, 2, size=(r, c)).astype(float)
    elif rng.random() < 0.5:
        vals = rng.integers(0, 5, size=(r, c)) / 4.0  # quarter grid, plenty of ties
    else:
        vals = rng.random((r, c))
    return FormulaTable(vals)

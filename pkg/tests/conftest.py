import numpy as np

from statquery import intent
from statquery.data import CATEGORICAL, CONTINUOUS, Column, Dataset

# action dataclasses, not test classes
intent.TestPairwise.__test__ = False
intent.TestSlopeByGroup.__test__ = False


def make_dataset(source_name="test", **columns):
    """Build a Dataset from keyword columns.

    Numeric sequences become continuous columns; string sequences become
    categorical columns with sorted levels.
    """
    cols = []
    n = None
    for name, values in columns.items():
        values = list(values)
        n = len(values) if n is None else n
        if all(v is None or isinstance(v, str) for v in values):
            levels = tuple(sorted({v for v in values if v is not None}))
            cols.append(
                Column(name=name, kind=CATEGORICAL, values=tuple(values), levels=levels)
            )
        else:
            vals = tuple(None if v is None else float(v) for v in values)
            cols.append(Column(name=name, kind=CONTINUOUS, values=vals))
    return Dataset(columns=tuple(cols), n_rows=n, source_name=source_name)


def normal_equation_beta(X, y):
    """Closed-form least-squares oracle (independent of the QR path)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.linalg.solve(X.T @ X, X.T @ y)

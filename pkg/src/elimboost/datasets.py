"""CSV ingestion, prediction output, and seeded synthetic generators.

Data files carry the header ``f0,...,f{d-1},label`` with decimal features
and integer labels starting at 1.  Parse failures report the 1-based line
number.
"""

import csv

import numpy as np

from .core import Dataset


class DataError(ValueError):
    """Base for input-file problems; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FormatError(DataError):
    pass


class LabelError(DataError):
    pass


class ConsistencyError(DataError):
    pass


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def load_csv(path, num_labels=None) -> Dataset:
    """Parse a dataset file; ``num_labels`` may extend the observed alphabet."""
    rows = [r for r in _read_rows(path) if r]
    if not rows:
        raise FormatError("file is empty", line=1)
    header = [c.strip() for c in rows[0]]
    if len(header) < 2 or header[-1] != "label" or \
            header[:-1] != [f"f{j}" for j in range(len(header) - 1)]:
        raise FormatError("expected header f0,...,f{d-1},label", line=1)
    dim = len(header) - 1
    if len(rows) == 1:
        raise FormatError("no data rows after the header", line=2)

    features = np.empty((len(rows) - 1, dim))
    labels = np.empty(len(rows) - 1, dtype=np.int64)
    for i, row in enumerate(rows[1:]):
        line = i + 2
        if len(row) != dim + 1:
            raise FormatError(f"expected {dim + 1} fields, got {len(row)}", line=line)
        try:
            features[i] = [float(v) for v in row[:-1]]
        except ValueError:
            raise FormatError(f"could not parse features {row[:-1]}", line=line) from None
        try:
            label = int(row[-1].strip())
        except ValueError:
            raise LabelError(f"label {row[-1]!r} is not an integer", line=line) from None
        if label < 1:
            raise LabelError(f"label {label} must be >= 1", line=line)
        labels[i] = label

    observed = int(labels.max())
    if num_labels is None:
        num_labels = max(observed, 2)
    elif num_labels < observed:
        raise LabelError(f"num_labels {num_labels} is below the largest observed label {observed}")

    seen = {}
    for i in range(features.shape[0]):
        key = features[i].tobytes()
        prev = seen.setdefault(key, i)
        if labels[prev] != labels[i]:
            raise ConsistencyError(
                f"duplicate of line {prev + 2} with a different label", line=i + 2)
    return Dataset(features, labels, num_labels)


def save_dataset_csv(path, data: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(data.dim)] + ["label"])
        for i in range(data.n_obs):
            writer.writerow([repr(v) for v in data.features[i]] + [int(data.labels[i])])


def load_feature_csv(path):
    """Features for prediction; a trailing label column is accepted and ignored."""
    rows = [r for r in _read_rows(path) if r]
    if not rows:
        raise FormatError("file is empty", line=1)
    header = [c.strip() for c in rows[0]]
    has_label = header and header[-1] == "label"
    names = header[:-1] if has_label else header
    if not names or names != [f"f{j}" for j in range(len(names))]:
        raise FormatError("expected header f0,...,f{d-1}[,label]", line=1)
    dim = len(names)
    if len(rows) == 1:
        raise FormatError("no data rows after the header", line=2)
    features = np.empty((len(rows) - 1, dim))
    for i, row in enumerate(rows[1:]):
        line = i + 2
        if len(row) != dim + (1 if has_label else 0):
            raise FormatError(f"unexpected field count {len(row)}", line=line)
        try:
            features[i] = [float(v) for v in row[:dim]]
        except ValueError:
            raise FormatError(f"could not parse features {row[:dim]}", line=line) from None
    return features


def save_predictions_csv(path, predictions) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prediction"])
        for label in predictions:
            writer.writerow([int(label)])


def holdout_split(n: int, fraction: float, seed: int):
    """Seeded permutation split; the prefix becomes the holdout."""
    if not 0.0 <= fraction < 1.0:
        raise ValueError("holdout fraction must lie in [0, 1)")
    perm = np.random.default_rng(seed).permutation(n)
    cut = int(np.floor(fraction * n))
    return np.sort(perm[cut:]), np.sort(perm[:cut])


GENERATORS = ("interval", "regions")


def synth(generator: str, n: int, num_labels: int, seed: int, margin: float = 0.05) -> Dataset:
    """Deterministic synthetic datasets with axis-separable label regions.

    ``interval`` places 1-D points in disjoint unit intervals, one per
    label; ``regions`` adds a second, label-free coordinate.  ``margin`` is
    the gap kept clear around each interval boundary.
    """
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}; choose from {GENERATORS}")
    if not 2 <= num_labels <= 5:
        raise ValueError("num_labels must lie in 2..5")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= margin < 1.0:
        raise ValueError("margin must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    labels = rng.integers(1, num_labels + 1, size=n)
    x = (labels - 1) + margin / 2.0 + rng.random(n) * (1.0 - margin)
    if generator == "interval":
        features = x[:, None]
    else:
        features = np.column_stack([x, rng.random(n) * num_labels])
    return Dataset(features, labels, num_labels)

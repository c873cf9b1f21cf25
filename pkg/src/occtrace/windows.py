"""Fixed-length windowing of variable-length traces.

A frame of ``size`` entries slides over each trace by ``shift`` positions.
Positions past the end of the trace are filled with the ``pad`` value, so the
only padded entries form a contiguous suffix of the final window. The window
count for a trace of length L is ``1 + ceil(max(0, L - size) / shift)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .base import as_float_matrix
from .errors import DimensionError, NotEnoughDataError
from .traces import Label


@dataclass(frozen=True)
class WindowConfig:
    size: int = 76
    shift: int = 10
    pad: float = 0.1
    drop_incomplete: bool = False

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("window size must be >= 1")
        if not 1 <= self.shift <= self.size:
            raise ValueError("shift must satisfy 1 <= shift <= size")


def window_count(length, cfg):
    """Closed-form number of windows for a trace of the given length."""
    return 1 + math.ceil(max(0, length - cfg.size) / cfg.shift)


def window_trace(trace, cfg):
    """Slice one trace into windows, returned as a (n_windows, size) float array.

    With ``drop_incomplete`` set, a final window containing pad values is
    discarded, which can leave a short trace with zero windows.
    """
    calls = np.asarray(trace.calls, dtype=np.float64)
    length = calls.size
    n_win = window_count(length, cfg)
    starts = np.arange(n_win) * cfg.shift
    idx = starts[:, None] + np.arange(cfg.size)[None, :]
    inside = idx < length
    out = np.where(inside, calls[np.minimum(idx, length - 1)], cfg.pad)
    if cfg.drop_incomplete and not inside[-1].all():
        out = out[:-1]
        starts = starts[:-1]
    return out, starts.astype(np.int64)


@dataclass(eq=False)
class WindowMatrix:
    """Column-stacked window vectors plus per-column label and origin."""

    data: np.ndarray          # shape (size, n_windows), one window per column
    labels: np.ndarray        # shape (n_windows,), Label values
    origins: tuple            # per column: (trace_id, start_offset)

    @property
    def dim(self):
        return int(self.data.shape[0])

    @property
    def n_windows(self):
        return int(self.data.shape[1])

    def rows(self):
        """Windows as rows, shape (n_windows, size)."""
        return self.data.T

    def count(self, label):
        return int(np.sum(self.labels == label))


def build_matrix(vectors, labels=None, origins=None):
    """Stack window vectors (in input order) into a WindowMatrix.

    All vectors must share one length. Labels default to UNLABELED and
    origins to anonymous placeholders.
    """
    vectors = list(vectors)
    if not vectors:
        raise NotEnoughDataError("cannot build a window matrix from zero windows")
    lengths = {np.asarray(v).shape for v in vectors}
    if any(len(shape) != 1 for shape in lengths) or len({s[0] for s in lengths}) != 1:
        raise DimensionError(f"window vectors must share one length, got shapes {sorted(lengths)}")
    rows = np.asarray(vectors, dtype=np.float64)
    n = rows.shape[0]
    if labels is None:
        labels = [Label.UNLABELED] * n
    if origins is None:
        origins = [("", i) for i in range(n)]
    labels = np.asarray([int(l) for l in labels], dtype=np.int64)
    origins = tuple(origins)
    if labels.shape[0] != n or len(origins) != n:
        raise DimensionError("labels and origins must align with the window count")
    return WindowMatrix(data=rows.T.copy(), labels=labels, origins=origins)


def window_dataset(dataset, cfg):
    """Window every trace of a dataset and stack the results in trace order."""
    blocks, labels, origins = [], [], []
    for trace in dataset.traces:
        rows, starts = window_trace(trace, cfg)
        if rows.shape[0] == 0:
            continue
        blocks.append(rows)
        labels.extend([trace.label] * rows.shape[0])
        origins.extend((trace.id, int(s)) for s in starts)
    if not blocks:
        raise NotEnoughDataError("dataset produced no windows")
    rows = np.concatenate(blocks, axis=0)
    return WindowMatrix(
        data=rows.T.copy(),
        labels=np.asarray([int(l) for l in labels], dtype=np.int64),
        origins=tuple(origins),
    )


def write_windows_csv(matrix, stream):
    """Debug dump: one window (column) per line, comma-separated values."""
    data = as_float_matrix(matrix.data, "window matrix")
    for col in data.T:
        stream.write(",".join(repr(float(v)) for v in col) + "\n")

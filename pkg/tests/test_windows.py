import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from occtrace.errors import DimensionError, NotEnoughDataError
from occtrace.traces import Dataset, Label, Role, SyscallTrace
from occtrace.windows import (
    WindowConfig,
    build_matrix,
    window_count,
    window_dataset,
    window_trace,
    write_windows_csv,
)

PAD = 0.1


def brute_force_windows(calls, size, shift, pad):
    """Reference enumerator: emit a frame, slide while it has not reached the end."""
    calls = list(calls)
    length = len(calls)
    out = []
    start = 0
    while True:
        out.append([calls[i] if i < length else pad for i in range(start, start + size)])
        if start + size >= length:
            break
        start += shift
    return out


def _trace(calls):
    return SyscallTrace("t", Label.NORMAL, calls)


def test_worked_example():
    rows, starts = window_trace(_trace(range(1, 11)), WindowConfig(size=6, shift=5, pad=PAD))
    assert rows.tolist() == [[1, 2, 3, 4, 5, 6], [6, 7, 8, 9, 10, PAD]]
    assert starts.tolist() == [0, 5]


def test_exact_fit_no_padding():
    rows, _ = window_trace(_trace(range(6)), WindowConfig(size=6, shift=5, pad=PAD))
    assert rows.shape == (1, 6)
    assert PAD not in rows


def test_minimum_trace_single_padded_window():
    rows, _ = window_trace(_trace(range(75)), WindowConfig(size=76, shift=10, pad=PAD))
    assert rows.shape == (1, 76)
    assert rows[0, -1] == PAD
    assert np.sum(rows == PAD) == 1


def test_matches_brute_force_on_random_shapes():
    rng = np.random.default_rng(7)
    for _ in range(200):
        size = int(rng.integers(1, 40))
        shift = int(rng.integers(1, size + 1))
        length = int(rng.integers(1, 300))
        calls = rng.integers(0, 300, size=length)
        cfg = WindowConfig(size=size, shift=shift, pad=PAD)
        rows, _ = window_trace(_trace(calls), cfg)
        expected = brute_force_windows(calls, size, shift, PAD)
        assert rows.shape[0] == window_count(length, cfg) == len(expected)
        np.testing.assert_array_equal(rows, np.asarray(expected))


@given(
    length=st.integers(min_value=1, max_value=400),
    size=st.integers(min_value=1, max_value=50),
    data=st.data(),
)
def test_count_formula_matches_enumeration(length, size, data):
    shift = data.draw(st.integers(min_value=1, max_value=size))
    cfg = WindowConfig(size=size, shift=shift, pad=PAD)
    calls = list(range(1, length + 1))
    assert window_count(length, cfg) == len(brute_force_windows(calls, size, shift, PAD))


def test_pad_only_as_contiguous_suffix():
    rng = np.random.default_rng(11)
    for _ in range(50):
        size = int(rng.integers(2, 30))
        shift = int(rng.integers(1, size + 1))
        length = int(rng.integers(1, 150))
        calls = rng.integers(1, 200, size=length)  # keep pad value distinguishable
        rows, _ = window_trace(_trace(calls), WindowConfig(size=size, shift=shift, pad=PAD))
        for row in rows:
            is_pad = row == PAD
            if is_pad.any():
                first = int(np.argmax(is_pad))
                assert is_pad[first:].all()


def test_reconstruction_from_window_overlap():
    rng = np.random.default_rng(3)
    for _ in range(40):
        size = int(rng.integers(2, 25))
        shift = int(rng.integers(1, size + 1))
        length = int(rng.integers(1, 120))
        calls = rng.integers(1, 200, size=length).tolist()
        rows, _ = window_trace(_trace(calls), WindowConfig(size=size, shift=shift, pad=PAD))
        rebuilt = [v for v in rows[0] if v != PAD]
        for row in rows[1:]:
            rebuilt.extend(v for v in row[-shift:] if v != PAD)
        assert rebuilt == calls


def test_drop_incomplete_final_window():
    cfg = WindowConfig(size=6, shift=5, pad=PAD, drop_incomplete=True)
    rows, _ = window_trace(_trace(range(1, 11)), cfg)
    assert rows.tolist() == [[1, 2, 3, 4, 5, 6]]
    short, _ = window_trace(_trace(range(3)), cfg)
    assert short.shape[0] == 0


def test_window_config_validation():
    with pytest.raises(ValueError):
        WindowConfig(size=0)
    with pytest.raises(ValueError):
        WindowConfig(size=5, shift=6)
    with pytest.raises(ValueError):
        WindowConfig(size=5, shift=0)


def test_build_matrix_shape_and_alignment():
    wm = build_matrix([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]],
                      labels=[Label.NORMAL, Label.ATTACK],
                      origins=[("a", 0), ("b", 5)])
    assert wm.data.shape == (3, 2)
    assert wm.data[:, 1].tolist() == [4.0, 5.0, 6.0]
    assert wm.labels.tolist() == [0, 1]
    assert wm.origins == (("a", 0), ("b", 5))


def test_build_matrix_errors():
    with pytest.raises(NotEnoughDataError):
        build_matrix([])
    with pytest.raises(DimensionError):
        build_matrix([[1.0, 2.0], [1.0, 2.0, 3.0]])
    with pytest.raises(DimensionError):
        build_matrix([[1.0, 2.0]], labels=[Label.NORMAL, Label.NORMAL])


def test_window_dataset_keeps_trace_order_and_labels():
    traces = (
        SyscallTrace("a", Label.NORMAL, range(1, 11)),
        SyscallTrace("b", Label.ATTACK, range(50, 57)),
    )
    ds = Dataset(traces=traces, role=Role.TESTING)
    wm = window_dataset(ds, WindowConfig(size=6, shift=5, pad=PAD))
    assert wm.n_windows == 4
    assert [o[0] for o in wm.origins] == ["a", "a", "b", "b"]
    assert wm.labels.tolist() == [0, 0, 1, 1]
    assert wm.count(Label.ATTACK) == 2


def test_csv_dump_one_window_per_line():
    wm = build_matrix([[1.0, 2.0], [3.0, 0.1]])
    buf = io.StringIO()
    write_windows_csv(wm, buf)
    assert buf.getvalue() == "1.0,2.0\n3.0,0.1\n"

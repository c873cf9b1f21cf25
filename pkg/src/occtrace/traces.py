"""System-call trace ingestion.

Traces are whitespace-separated sequences of non-negative integers, one file
per trace. Two directory layouts are supported:

* ``adfa``: ``<root>/Training_Data_Master/*.txt`` (normal, training),
  ``<root>/Validation_Data_Master/*.txt`` (normal, testing only) and
  ``<root>/Attack_Data_Master/<attack_name>_<k>/*.txt`` (attack, testing only).
* ``flat``: ``<root>/normal/*.txt`` and ``<root>/attack/*.txt``.

A deterministic synthetic generator produces desk-scale datasets from a pair
of first-order Markov chains, one per class.
"""

import re
from dataclasses import dataclass
from enum import Enum, IntEnum
from pathlib import Path

import numpy as np

from .errors import DatasetError, TraceParseError

_TOKEN = re.compile(rb"\S+")


class Label(IntEnum):
    NORMAL = 0
    ATTACK = 1
    UNLABELED = 2


class Role(Enum):
    TRAINING = "training"
    TESTING = "testing"


@dataclass(frozen=True, eq=False)
class SyscallTrace:
    """A labeled sequence of system-call numbers.

    ``calls`` is a read-only int64 array; every entry is >= 0 and the
    sequence is never empty.
    """

    id: str
    label: Label
    calls: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.calls, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise TraceParseError("trace must contain at least one call")
        if (arr < 0).any():
            raise TraceParseError("call numbers must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "calls", arr)

    def __len__(self):
        return int(self.calls.size)


def parse_trace_file(text, trace_id="", label=Label.UNLABELED):
    """Parse one whitespace-separated integer sequence into a SyscallTrace.

    Accepts str or bytes. Raises TraceParseError for an empty stream or for
    any token that is not a non-negative integer; the error carries the byte
    offset of the offending token.
    """
    data = text.encode("utf-8", errors="replace") if isinstance(text, str) else bytes(text)
    calls = []
    for match in _TOKEN.finditer(data):
        token = match.group()
        try:
            value = int(token)
        except ValueError:
            raise TraceParseError(
                f"malformed token {token.decode('utf-8', 'replace')!r}", offset=match.start()
            ) from None
        if value < 0:
            raise TraceParseError(f"negative call number {value}", offset=match.start())
        calls.append(value)
    if not calls:
        raise TraceParseError("empty trace: no tokens found")
    return SyscallTrace(id=trace_id, label=label, calls=np.asarray(calls, dtype=np.int64))


def format_trace(trace):
    """Serialize the call sequence as a single space-separated line."""
    return " ".join(str(int(c)) for c in trace.calls)


def _read_trace(path, label, root):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise DatasetError(f"cannot read trace file {path}: {exc}") from exc
    trace_id = str(Path(path).relative_to(root))
    try:
        return parse_trace_file(raw, trace_id=trace_id, label=label)
    except TraceParseError as exc:
        raise TraceParseError(str(exc), offset=exc.offset, path=str(path)) from None


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable collection of traces with a declared role.

    Training datasets must contain only normal traces; this is the one-class
    constraint and it is enforced at construction time.
    """

    traces: tuple
    role: Role
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(self.traces))
        if self.role is Role.TRAINING:
            bad = [t.id for t in self.traces if t.label is not Label.NORMAL]
            if bad:
                raise DatasetError(
                    f"training dataset may only contain normal traces; offending: {bad[:3]}"
                )

    def __len__(self):
        return len(self.traces)

    def count(self, label):
        return sum(1 for t in self.traces if t.label is label)


_ADFA_TRAIN = "Training_Data_Master"
_ADFA_VALIDATION = "Validation_Data_Master"
_ADFA_ATTACK = "Attack_Data_Master"


def _sorted_files(directory, pattern="*.txt"):
    return sorted(p for p in Path(directory).glob(pattern) if p.is_file())


def _require_dir(path, what):
    if not Path(path).is_dir():
        raise DatasetError(f"missing directory: {what} ({path})")
    return Path(path)


def load_dataset(root_path, layout, role):
    """Load every trace file under ``root_path`` for the given layout and role.

    Files are read in lexicographically sorted path order so that dataset
    assembly is deterministic. Any parse failure aborts the load and reports
    the offending file path.
    """
    root = _require_dir(root_path, "dataset root")
    layout = str(layout).lower()
    entries = []
    if layout == "adfa":
        train_dir = _require_dir(root / _ADFA_TRAIN, _ADFA_TRAIN)
        entries += [(p, Label.NORMAL) for p in _sorted_files(train_dir)]
        if role is Role.TESTING:
            val_dir = _require_dir(root / _ADFA_VALIDATION, _ADFA_VALIDATION)
            entries += [(p, Label.NORMAL) for p in _sorted_files(val_dir)]
            attack_dir = _require_dir(root / _ADFA_ATTACK, _ADFA_ATTACK)
            attack_files = sorted(
                p for p in attack_dir.rglob("*.txt") if p.is_file()
            )
            entries += [(p, Label.ATTACK) for p in attack_files]
    elif layout == "flat":
        normal_dir = _require_dir(root / "normal", "normal")
        entries += [(p, Label.NORMAL) for p in _sorted_files(normal_dir)]
        if role is Role.TESTING:
            attack_dir = root / "attack"
            if attack_dir.is_dir():
                entries += [(p, Label.ATTACK) for p in _sorted_files(attack_dir)]
    else:
        raise DatasetError(f"unknown layout {layout!r}; expected 'adfa' or 'flat'")

    if not entries:
        raise DatasetError(f"empty dataset: no trace files found under {root}")
    traces = [_read_trace(path, label, root) for path, label in entries]
    return Dataset(traces=tuple(traces), role=role, provenance=f"{layout}:{root}")


def save_dataset_flat(dataset, root_path):
    """Write a dataset in the flat layout (normal/ and attack/ subdirectories)."""
    root = Path(root_path)
    names = {Label.NORMAL: "normal", Label.ATTACK: "attack"}
    counters = {Label.NORMAL: 0, Label.ATTACK: 0}
    for trace in dataset.traces:
        sub = names.get(trace.label)
        if sub is None:
            raise DatasetError(f"cannot store unlabeled trace {trace.id!r} in flat layout")
        directory = root / sub
        directory.mkdir(parents=True, exist_ok=True)
        index = counters[trace.label]
        counters[trace.label] += 1
        (directory / f"{index:04d}.txt").write_text(format_trace(trace) + "\n")
    return root


@dataclass(frozen=True)
class SynthConfig:
    """Configuration for the deterministic two-chain synthetic generator.

    ``n_normal`` traces form the training set; the testing set holds
    ``n_normal_test`` fresh normal traces (defaults to ``n_attack``) plus
    ``n_attack`` attack traces. Normal chains step to nearby call numbers
    (``normal_max_jump``), mimicking the repetitive local structure of benign
    processes, while attack chains default to unconstrained jumps. Identical
    configs produce bit-identical datasets.
    """

    alphabet_size: int = 64
    normal_transition_seed: int = 7
    attack_transition_seed: int = 11
    n_normal: int = 200
    n_attack: int = 100
    n_normal_test: int | None = None
    min_len: int = 100
    max_len: int = 240
    branch_factor: int = 3
    normal_max_jump: int | None = 4
    attack_max_jump: int | None = None

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise ValueError("alphabet_size must be >= 2")
        if self.min_len < 1 or self.max_len < self.min_len:
            raise ValueError("need 1 <= min_len <= max_len")
        if self.n_normal < 0 or self.n_attack < 0:
            raise ValueError("trace counts must be non-negative")
        if not 1 <= self.branch_factor <= self.alphabet_size:
            raise ValueError("branch_factor must be in [1, alphabet_size]")
        for jump in (self.normal_max_jump, self.attack_max_jump):
            if jump is not None and not self.branch_factor <= jump < self.alphabet_size:
                raise ValueError("max_jump must lie in [branch_factor, alphabet_size)")

    @property
    def test_normal_count(self):
        return self.n_attack if self.n_normal_test is None else self.n_normal_test


def _build_chain(seed, alphabet_size, branch_factor, max_jump):
    # Each state transitions uniformly to a small random successor set. With
    # max_jump set, successors stay within that distance of the state (modulo
    # the alphabet); otherwise they are drawn from the whole alphabet.
    rng = np.random.default_rng([seed, 0])
    successors = np.empty((alphabet_size, branch_factor), dtype=np.int64)
    for state in range(alphabet_size):
        if max_jump is None:
            successors[state] = rng.choice(alphabet_size, size=branch_factor, replace=False)
        else:
            offsets = rng.choice(max_jump, size=branch_factor, replace=False) + 1
            successors[state] = (state + offsets) % alphabet_size
    return successors


def _walk(successors, length, rng):
    alphabet_size, branch = successors.shape
    out = np.empty(length, dtype=np.int64)
    state = int(rng.integers(alphabet_size))
    out[0] = state
    choices = rng.integers(branch, size=length - 1) if length > 1 else ()
    for i, c in enumerate(choices):
        state = int(successors[state, c])
        out[i + 1] = state
    return out


def _sample_traces(successors, count, prefix, label, cfg, stream):
    rng = np.random.default_rng(stream)
    traces = []
    for i in range(count):
        length = int(rng.integers(cfg.min_len, cfg.max_len + 1))
        calls = _walk(successors, length, rng)
        traces.append(SyscallTrace(id=f"{prefix}-{i:04d}", label=label, calls=calls))
    return traces


def generate_synthetic_dataset(cfg):
    """Generate a (training, testing) dataset pair from the two Markov chains."""
    normal_chain = _build_chain(
        cfg.normal_transition_seed, cfg.alphabet_size, cfg.branch_factor, cfg.normal_max_jump
    )
    attack_chain = _build_chain(
        cfg.attack_transition_seed, cfg.alphabet_size, cfg.branch_factor, cfg.attack_max_jump
    )

    train_normals = _sample_traces(
        normal_chain, cfg.n_normal, "train-normal", Label.NORMAL, cfg,
        [cfg.normal_transition_seed, 1],
    )
    test_normals = _sample_traces(
        normal_chain, cfg.test_normal_count, "test-normal", Label.NORMAL, cfg,
        [cfg.normal_transition_seed, 2],
    )
    test_attacks = _sample_traces(
        attack_chain, cfg.n_attack, "test-attack", Label.ATTACK, cfg,
        [cfg.attack_transition_seed, 3],
    )

    training = Dataset(tuple(train_normals), Role.TRAINING, provenance="synthetic:markov")
    testing = Dataset(tuple(test_normals + test_attacks), Role.TESTING, provenance="synthetic:markov")
    return training, testing

"""Count-frequency histograms.

A histogram maps a multiplicity ``j >= 1`` to ``n_j``, the number of classes
observed exactly ``j`` times. ``n_0`` is never stored.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, TextIO, Union

import numpy as np


class HistogramError(ValueError):
    pass


@dataclass(frozen=True)
class CountHistogram:
    """Immutable sparse count-frequency histogram.

    ``multiplicities`` is strictly increasing, ``frequencies`` strictly
    positive; both are int64 arrays of equal length.
    """

    multiplicities: np.ndarray
    frequencies: np.ndarray
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        j = np.asarray(self.multiplicities, dtype=np.int64)
        n = np.asarray(self.frequencies, dtype=np.int64)
        if j.ndim != 1 or j.shape != n.shape:
            raise HistogramError("multiplicities and frequencies must be 1-d and equal length")
        if j.size == 0:
            raise HistogramError("empty histogram")
        if np.any(j < 1):
            raise HistogramError("multiplicities must be >= 1 (n_0 is not observable)")
        if np.any(np.diff(j) <= 0):
            raise HistogramError("multiplicities must be strictly increasing")
        if np.any(n < 1):
            raise HistogramError("frequencies must be positive")
        j.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "multiplicities", j)
        object.__setattr__(self, "frequencies", n)
        object.__setattr__(self, "_lookup", dict(zip(j.tolist(), n.tolist())))

    @classmethod
    def from_mapping(cls, freqs: Mapping[int, int]) -> "CountHistogram":
        """Build from ``{j: n_j}``; zero frequencies are dropped."""
        items = sorted((int(j), int(n)) for j, n in freqs.items() if n != 0)
        if not items:
            raise HistogramError("empty histogram")
        j, n = zip(*items)
        return cls(np.array(j, dtype=np.int64), np.array(n, dtype=np.int64))

    def __getitem__(self, j: int) -> int:
        return self._lookup.get(int(j), 0)

    def __len__(self) -> int:
        return len(self._lookup)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CountHistogram):
            return NotImplemented
        return self._lookup == other._lookup

    def __hash__(self):
        return hash(tuple(self._lookup.items()))

    def items(self):
        return self._lookup.items()

    def as_dict(self) -> dict[int, int]:
        return dict(self._lookup)

    @property
    def D(self) -> int:
        """Number of distinct observed classes."""
        return int(self.frequencies.sum())

    @property
    def N(self) -> int:
        """Total number of sampled individuals."""
        return int(np.dot(self.multiplicities, self.frequencies))

    @property
    def max_multiplicity(self) -> int:
        return int(self.multiplicities[-1])

    def scaled(self, c: int) -> "CountHistogram":
        return CountHistogram(self.multiplicities, self.frequencies * int(c))

    def render(self) -> str:
        return "".join(f"{j}\t{n}\n" for j, n in self._lookup.items())


def parse_histogram(source: Union[str, TextIO]) -> CountHistogram:
    """Parse the two-column ``j n_j`` text format.

    Blank lines and ``#`` comments are skipped, rows with ``n_j == 0`` are
    dropped. Errors carry the 1-based line number.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    freqs: dict[int, int] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise HistogramError(f"line {lineno}: expected 2 fields, got {len(fields)}: {raw.rstrip()!r}")
        try:
            j, n = int(fields[0]), int(fields[1])
        except ValueError:
            raise HistogramError(f"line {lineno}: non-integer field: {raw.rstrip()!r}") from None
        if j < 0 or n < 0:
            raise HistogramError(f"line {lineno}: negative value: {raw.rstrip()!r}")
        if j == 0:
            raise HistogramError(f"line {lineno}: multiplicity 0 given; n_0 is the unknown, not an input")
        if j in freqs:
            raise HistogramError(f"line {lineno}: duplicate multiplicity {j}")
        freqs[j] = n
    if not any(freqs.values()):
        raise HistogramError("empty histogram")
    return CountHistogram.from_mapping(freqs)


def parse_counts(source: Union[str, TextIO]) -> CountHistogram:
    """Parse a raw per-class counts file, one non-negative integer per line."""
    stream = io.StringIO(source) if isinstance(source, str) else source
    counts = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            c = int(line)
        except ValueError:
            raise HistogramError(f"line {lineno}: not an integer: {raw.rstrip()!r}") from None
        if c < 0:
            raise HistogramError(f"line {lineno}: negative count")
        counts.append(c)
    return from_counts(counts)


def from_counts(counts: Iterable[int]) -> CountHistogram:
    """Tally per-class counts into a histogram; zeros (unobserved classes) are dropped."""
    arr = np.asarray(list(counts) if not isinstance(counts, np.ndarray) else counts, dtype=np.int64)
    if arr.size and arr.min() < 0:
        raise HistogramError("negative count")
    arr = arr[arr > 0]
    if arr.size == 0:
        raise HistogramError("empty histogram: no nonzero counts")
    j, n = np.unique(arr, return_counts=True)
    return CountHistogram(j, n)


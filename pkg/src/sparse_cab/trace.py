"""Per-round regret traces and their CSV form."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_HEADER = ("t", "epoch_T", "M", "arm", "reward", "inst_regret", "cum_regret")


@dataclass
class RegretTrace:
    """Columns of a run; row i is round t = i + 1.

    ``fingerprint`` identifies the configuration, ``seeds`` records the
    environment and algorithm seeds used.
    """

    epoch_T: np.ndarray
    M: np.ndarray
    arm: np.ndarray
    reward: np.ndarray
    inst_regret: np.ndarray
    fingerprint: str = ""
    seeds: dict = field(default_factory=dict)
    cum_regret: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.cum_regret is None:
            self.cum_regret = np.cumsum(self.inst_regret)

    @property
    def rounds(self) -> int:
        return len(self.reward)

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.rounds + 1)

    def regret_at(self, n: int) -> float:
        """Cumulative regret after n rounds."""
        if not 1 <= n <= self.rounds:
            raise IndexError(f"checkpoint {n} outside the trace (1..{self.rounds})")
        return float(self.cum_regret[n - 1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, RegretTrace):
            return NotImplemented
        cols = ("epoch_T", "M", "arm", "reward", "inst_regret", "cum_regret")
        return (
            self.fingerprint == other.fingerprint
            and self.seeds == other.seeds
            and all(np.array_equal(getattr(self, c), getattr(other, c)) for c in cols)
        )

    def to_csv(self) -> str:
        """CSV text; floats use repr so parsing recovers them exactly.

        Metadata goes on leading ``#`` lines ahead of the header.
        """
        buf = io.StringIO()
        buf.write(f"# fingerprint={self.fingerprint}\n")
        for key in sorted(self.seeds):
            buf.write(f"# seed.{key}={self.seeds[key]}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i in range(self.rounds):
            w.writerow(
                (
                    i + 1,
                    int(self.epoch_T[i]),
                    int(self.M[i]),
                    int(self.arm[i]),
                    repr(float(self.reward[i])),
                    repr(float(self.inst_regret[i])),
                    repr(float(self.cum_regret[i])),
                )
            )
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "RegretTrace":
        fingerprint, seeds, rows = "", {}, []
        lines = text.splitlines()
        body = []
        for line in lines:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key == "fingerprint":
                    fingerprint = value
                elif key.startswith("seed."):
                    seeds[key[5:]] = int(value)
            else:
                body.append(line)
        reader = csv.reader(body)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected trace header {header}")
        rows = list(reader)
        cols = list(zip(*rows)) if rows else [()] * len(CSV_HEADER)
        as_int = lambda c: np.asarray(c, dtype=np.int64)  # noqa: E731
        as_float = lambda c: np.asarray([float(v) for v in c], dtype=float)  # noqa: E731
        return cls(
            epoch_T=as_int(cols[1]),
            M=as_int(cols[2]),
            arm=as_int(cols[3]),
            reward=as_float(cols[4]),
            inst_regret=as_float(cols[5]),
            cum_regret=as_float(cols[6]),
            fingerprint=fingerprint,
            seeds=seeds,
        )

    @classmethod
    def read_csv(cls, path: str | Path) -> "RegretTrace":
        return cls.from_csv(Path(path).read_text())

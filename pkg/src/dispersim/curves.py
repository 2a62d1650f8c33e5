"""Dispersion-curve container and its CSV/JSON export."""

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class DispersionCurve:
    """Wavenumber and group velocity vs frequency for one wave mode.

    ``spread`` is the per-bin cross-pair standard deviation of the group
    velocity (zero for analytic curves) and ``n_pairs`` the number of
    sensor pairs contributing to each bin (zero for analytic curves).
    ``reliable`` flags bins whose cross-pair scatter is small enough to
    trust; analytic curves are reliable everywhere.
    """

    freq_hz: np.ndarray
    k: np.ndarray
    v_group: np.ndarray
    spread: np.ndarray
    n_pairs: np.ndarray
    reliable: np.ndarray = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.freq_hz = np.asarray(self.freq_hz, dtype=float)
        self.k = np.asarray(self.k, dtype=float)
        self.v_group = np.asarray(self.v_group, dtype=float)
        self.spread = np.asarray(self.spread, dtype=float)
        self.n_pairs = np.asarray(self.n_pairs, dtype=int)
        if self.reliable is None:
            self.reliable = np.ones(self.freq_hz.shape, dtype=bool)
        self.reliable = np.asarray(self.reliable, dtype=bool)
        n = self.freq_hz.size
        for name in ("k", "v_group", "spread", "n_pairs", "reliable"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"field {name} has inconsistent length")
        if n > 1 and np.any(np.diff(self.freq_hz) <= 0):
            raise ValueError("frequency grid must be strictly increasing")

    def to_csv(self, path):
        header_meta = json.dumps(self.metadata, sort_keys=True)
        with open(path, "w") as fh:
            fh.write(f"# metadata: {header_meta}\n")
            fh.write("freq_hz,k_per_m,vg_mps,spread_mps,n_pairs,reliable\n")
            for i in range(self.freq_hz.size):
                fh.write(
                    f"{float(self.freq_hz[i])!r},{float(self.k[i])!r},"
                    f"{float(self.v_group[i])!r},{float(self.spread[i])!r},"
                    f"{int(self.n_pairs[i])},{int(self.reliable[i])}\n"
                )

    def to_json_dict(self):
        return {
            "metadata": self.metadata,
            "freq_hz": self.freq_hz.tolist(),
            "k_per_m": self.k.tolist(),
            "vg_mps": self.v_group.tolist(),
            "spread_mps": self.spread.tolist(),
            "n_pairs": self.n_pairs.tolist(),
            "reliable": self.reliable.astype(int).tolist(),
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True, indent=1)

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            freq_hz=d["freq_hz"],
            k=d["k_per_m"],
            v_group=d["vg_mps"],
            spread=d["spread_mps"],
            n_pairs=d["n_pairs"],
            reliable=np.asarray(d["reliable"], dtype=bool),
            metadata=d.get("metadata", {}),
        )

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

"""FRF dataset container with CSV and JSON serialization.

CSV is long-form ``freq_hz, loc_m, re, im`` with ``# key: value`` header
lines for metadata.  The JSON form is the authoritative round-trip format
(Python's shortest-repr float encoding is bit exact).
"""

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class FrfDataset:
    """Receptance FRFs [m/N] for one driving point and many locations.

    ``freq_grid`` is angular frequency [rad/s], strictly increasing and
    excluding zero; ``values`` has shape (n_locations, n_freq).
    """

    freq_grid: np.ndarray
    locations: np.ndarray
    values: np.ndarray
    excitation_mode: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.freq_grid = np.asarray(self.freq_grid, dtype=float)
        self.locations = np.asarray(self.locations, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.freq_grid.ndim != 1 or self.freq_grid[0] <= 0:
            raise ValueError("freq_grid must be 1-D with all frequencies > 0")
        if np.any(np.diff(self.freq_grid) <= 0):
            raise ValueError("freq_grid must be strictly increasing")
        if self.values.shape != (self.locations.size, self.freq_grid.size):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{self.locations.size} locations x {self.freq_grid.size} frequencies"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("FRF values must be finite")

    @property
    def freq_hz(self):
        return self.freq_grid / (2.0 * np.pi)

    @property
    def n_channels(self):
        return self.locations.size

    def band_slice(self, f_lo_hz, f_hi_hz):
        """Boolean mask of grid points with f_lo <= f < f_hi (Hz)."""
        f = self.freq_hz
        return (f >= f_lo_hz) & (f < f_hi_hz)

    def to_json_dict(self):
        return {
            "format": "frf-dataset",
            "excitation_mode": self.excitation_mode,
            "metadata": self.metadata,
            "freq_hz": self.freq_hz.tolist(),
            "locations_m": self.locations.tolist(),
            "values_re": self.values.real.tolist(),
            "values_im": self.values.imag.tolist(),
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @classmethod
    def from_json_dict(cls, d):
        if d.get("format") != "frf-dataset":
            raise ValueError("not an FRF dataset JSON document")
        values = np.asarray(d["values_re"], dtype=float) + 1j * np.asarray(
            d["values_im"], dtype=float
        )
        return cls(
            freq_grid=2.0 * np.pi * np.asarray(d["freq_hz"], dtype=float),
            locations=np.asarray(d["locations_m"], dtype=float),
            values=values,
            excitation_mode=d["excitation_mode"],
            metadata=d.get("metadata", {}),
        )

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(f"# excitation_mode: {self.excitation_mode}\n")
            fh.write(f"# units: receptance m/N\n")
            fh.write(f"# metadata: {json.dumps(self.metadata, sort_keys=True)}\n")
            fh.write("freq_hz,loc_m,re,im\n")
            f_hz = self.freq_hz
            for i, loc in enumerate(self.locations):
                row = self.values[i]
                for j in range(f_hz.size):
                    fh.write(
                        f"{float(f_hz[j])!r},{float(loc)!r},"
                        f"{float(row[j].real)!r},{float(row[j].imag)!r}\n"
                    )

    @classmethod
    def from_csv(cls, path):
        meta = {}
        mode = None
        freqs, locs, res, ims = [], [], [], []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if body.startswith("excitation_mode:"):
                        mode = body.split(":", 1)[1].strip()
                    elif body.startswith("metadata:"):
                        meta = json.loads(body.split(":", 1)[1])
                    continue
                if line.startswith("freq_hz"):
                    continue
                a, b, c, d = line.split(",")
                freqs.append(float(a))
                locs.append(float(b))
                res.append(float(c))
                ims.append(float(d))
        freqs = np.asarray(freqs)
        locs = np.asarray(locs)
        uniq_f = np.unique(freqs)
        uniq_loc = np.unique(locs)
        values = np.empty((uniq_loc.size, uniq_f.size), dtype=complex)
        fi = np.searchsorted(uniq_f, freqs)
        li = np.searchsorted(uniq_loc, locs)
        values[li, fi] = np.asarray(res) + 1j * np.asarray(ims)
        return cls(
            freq_grid=2.0 * np.pi * uniq_f,
            locations=uniq_loc,
            values=values,
            excitation_mode=mode or "flexural",
            metadata=meta,
        )

"""Delimited time-series output: one time column plus named channels.

CSV is the interchange format between the simulation runs and any external
plotting, so writing is deterministic: fixed column order, %.17g floats
(round-trips float64 exactly), RFC-4180 line endings from the csv module.
"""

import csv
from dataclasses import dataclass

import numpy as np

__all__ = ["TimeSeries"]


@dataclass
class TimeSeries:
    """Sampled scalar channels over a common time grid.

    channels maps name -> float64 array, all the same length as t.
    Insertion order of the dict is the column order on disk.
    """

    t: np.ndarray
    channels: dict

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.channels = {k: np.asarray(v, dtype=float) for k, v in self.channels.items()}
        for name, arr in self.channels.items():
            if arr.shape != self.t.shape:
                raise ValueError(f"channel {name!r} has shape {arr.shape}, want {self.t.shape}")

    def __len__(self):
        return self.t.size

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", *self.channels])
            cols = [self.t, *self.channels.values()]
            for row in zip(*cols):
                writer.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if not header or header[0] != "t":
                raise ValueError(f"{path}: first column must be 't', got {header[:1]}")
            rows = [[float(v) for v in row] for row in reader if row]
        data = np.array(rows, dtype=float).reshape(len(rows), len(header))
        channels = {name: data[:, i] for i, name in enumerate(header) if i > 0}
        return cls(t=data[:, 0], channels=channels)

    @classmethod
    def from_run(cls, run, expand=None):
        """Build from a SampledRun, flattening vector observers.

        Scalar observers become one channel under their own name.  A vector
        observer named ``name`` becomes ``name_<label>`` columns; labels come
        from expand[name] if given, else the flat index.
        """
        channels = {}
        for name, vals in run.observed.items():
            vals = np.asarray(vals)
            if vals.ndim == 1:
                channels[name] = vals.astype(float)
            else:
                flat = vals.reshape(vals.shape[0], -1)
                labels = None if expand is None else expand.get(name)
                if labels is None:
                    labels = [str(i) for i in range(flat.shape[1])]
                if len(labels) != flat.shape[1]:
                    raise ValueError(f"observer {name!r}: {flat.shape[1]} components, {len(labels)} labels")
                for i, label in enumerate(labels):
                    channels[f"{name}_{label}"] = flat[:, i].astype(float)
        return cls(t=run.t, channels=channels)

import json
import os
from collections import OrderedDict

import numpy as np
import pandas as pd

from modules.flow import DIRECTIONS, FORWARD, INVERSE
from utils.errors import ContractError, CorruptFileError, MissingFileError, ShapeError

DATASET_MAGIC = "# prnf-dataset v1"


class Dataset:
    """N paired samples (cond, target) with the declared conditioning direction.

    ``provenance`` holds the problem description and seeds the data was
    generated from, enough for ``benchmarks.regenerate`` to rebuild it.
    """

    def __init__(self, cond, target, direction=FORWARD, provenance=None):
        self.cond = np.array(cond, dtype=np.float64)
        self.target = np.array(target, dtype=np.float64)
        if self.cond.ndim == 1:
            self.cond = self.cond[:, None]
        if self.target.ndim == 1:
            self.target = self.target[:, None]
        if self.cond.shape[0] != self.target.shape[0]:
            raise ShapeError("cond has {} rows but target has {}".format(self.cond.shape[0], self.target.shape[0]))
        if direction not in DIRECTIONS:
            raise ContractError("unknown direction {}".format(direction))
        self.direction = direction
        self.provenance = OrderedDict(provenance or {})
        self.cond.setflags(write=False)
        self.target.setflags(write=False)

    def __len__(self):
        return self.cond.shape[0]

    @property
    def d(self):
        return self.cond.shape[1]

    @property
    def s(self):
        return self.target.shape[1]

    def joint(self):
        return np.concatenate([self.cond, self.target], axis=1)

    def swap(self):
        """Exchange the roles of the conditioning and target blocks."""
        other = INVERSE if self.direction == FORWARD else FORWARD
        return Dataset(self.target, self.cond, other, self.provenance)

    def with_direction(self, direction):
        if direction not in DIRECTIONS:
            raise ContractError("unknown direction {}".format(direction))
        return self if direction == self.direction else self.swap()

    def subset(self, indices):
        indices = np.asarray(indices)
        return Dataset(self.cond[indices], self.target[indices], self.direction, self.provenance)

    def batches(self, batch_size, rng=None):
        """Index arrays covering the dataset once. batch_size 0 means one full batch."""
        n = len(self)
        if batch_size <= 0 or batch_size >= n:
            return [np.arange(n)]
        order = np.arange(n) if rng is None else rng.permutation(n)
        return [order[i:i + batch_size] for i in range(0, n, batch_size)]


def save_dataset(dataset, path):
    header = [
        DATASET_MAGIC,
        "# provenance: {}".format(json.dumps(dataset.provenance, sort_keys=True)),
        "# d: {}".format(dataset.d),
        "# s: {}".format(dataset.s),
        "# direction: {}".format(dataset.direction),
    ]
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(header) + "\n")
        np.savetxt(f, dataset.joint(), fmt="%.17g", delimiter=",")


def load_dataset(path):
    if not os.path.isfile(path):
        raise MissingFileError(path, "dataset")
    meta = {}
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().rstrip("\n")
        if first != DATASET_MAGIC:
            raise CorruptFileError(path, "missing '{}' header".format(DATASET_MAGIC))
        for line in f:
            if not line.startswith("#"):
                break
            key, sep, value = line[1:].partition(":")
            if not sep:
                raise CorruptFileError(path, "malformed header line {!r}".format(line.rstrip()))
            meta[key.strip()] = value.strip()
    try:
        d, s = int(meta["d"]), int(meta["s"])
        direction = meta["direction"]
        provenance = json.loads(meta["provenance"], object_pairs_hook=OrderedDict)
    except (KeyError, ValueError) as e:
        raise CorruptFileError(path, "bad header: {}".format(e))
    if direction not in DIRECTIONS:
        raise CorruptFileError(path, "unknown direction {}".format(direction))

    try:
        frame = pd.read_csv(path, comment="#", header=None, float_precision="round_trip", dtype=np.float64)
    except (pd.errors.EmptyDataError, ValueError) as e:
        raise CorruptFileError(path, "unreadable rows: {}".format(e))
    rows = frame.to_numpy(dtype=np.float64)
    if rows.shape[1] != d + s:
        raise CorruptFileError(path, "rows have {} columns, header declares {}".format(rows.shape[1], d + s))
    if not np.all(np.isfinite(rows)):
        raise CorruptFileError(path, "non-finite values in rows")
    return Dataset(rows[:, :d], rows[:, d:], direction, provenance)

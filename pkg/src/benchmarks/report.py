import json
import os
from collections import OrderedDict

import numpy as np
import pandas as pd

from utils.errors import CorruptFileError, MissingFileError

REPORT_VERSION = 1
BAND_Z = 1.96


class BenchmarkReport:
    """Metric bundle of one evaluation.

    ``per_point`` maps a metric name to its per-test-point values; the
    aggregate of a metric is always the arithmetic mean of those values.
    """

    def __init__(self, kind, test_points, per_point, estimator=None, loss_history=None, timings=None,
                 config=None, seeds=None, extras=None):
        self.kind = kind
        self.test_points = np.asarray(test_points, dtype=np.float64).tolist()
        self.per_point = OrderedDict((k, [float(v) for v in vals]) for k, vals in per_point.items())
        self.estimator = estimator
        self.loss_history = list(loss_history or [])
        self.timings = OrderedDict(timings or {})
        self.config = config or {}
        self.seeds = seeds or {}
        self.extras = OrderedDict(extras or {})

    @property
    def aggregates(self):
        return OrderedDict((k, float(np.mean(v)) if v else float("nan")) for k, v in self.per_point.items())

    def to_dict(self):
        return OrderedDict(
            version=REPORT_VERSION,
            kind=self.kind,
            aggregates=self.aggregates,
            estimator=self.estimator,
            test_points=self.test_points,
            per_point=self.per_point,
            loss_history=self.loss_history,
            timings=self.timings,
            seeds=self.seeds,
            extras=self.extras,
            config=self.config,
        )

    @classmethod
    def from_dict(cls, values):
        return cls(values["kind"], values["test_points"], values["per_point"], values.get("estimator"),
                   values.get("loss_history"), values.get("timings"), values.get("config"),
                   values.get("seeds"), values.get("extras"))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, default=_jsonable)
            f.write("\n")

    @classmethod
    def load(cls, path):
        if not os.path.isfile(path):
            raise MissingFileError(path, "report")
        try:
            with open(path, "r", encoding="utf-8") as f:
                values = json.load(f, object_pairs_hook=OrderedDict)
            report = cls.from_dict(values)
        except (ValueError, KeyError, TypeError) as e:
            raise CorruptFileError(path, "unreadable report: {}".format(e))
        for name, value in values.get("aggregates", {}).items():
            expected = report.aggregates.get(name)
            if expected is None or not np.isclose(value, expected, rtol=1e-12, atol=0.0, equal_nan=True):
                raise CorruptFileError(path, "aggregate {} does not match its per-point mean".format(name))
        return report

    def per_point_frame(self):
        points = np.asarray(self.test_points)
        if points.ndim == 2:
            columns = OrderedDict(("point_{}".format(i), points[:, i]) for i in range(points.shape[1]))
        else:
            columns = OrderedDict(point=points)
        frame = pd.DataFrame(columns)
        for name, values in self.per_point.items():
            frame[name] = values
        return frame


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError("not JSON serializable: {!r}".format(type(value)))


def loss_history_frame(history):
    return pd.DataFrame([r._asdict() for r in history], columns=["epoch", "l1", "l2", "total", "singular_skipped"])


def confidence_bands(curves, index_name="epoch"):
    """Per-index min, max, mean and mean +- 1.96 std / sqrt(cells) over a set of curves.

    ``curves`` maps a cell label to a Series (or sequence) indexed by epoch.
    """
    frame = pd.DataFrame({k: pd.Series(v) for k, v in curves.items()})
    cells = frame.notna().sum(axis=1)
    mean = frame.mean(axis=1)
    half = BAND_Z * frame.std(axis=1, ddof=1).fillna(0.0) / np.sqrt(cells)
    bands = pd.DataFrame(OrderedDict(
        min=frame.min(axis=1), max=frame.max(axis=1), mean=mean, lower=mean - half, upper=mean + half, cells=cells))
    bands.index.name = index_name
    return bands.reset_index()

"""Sliding-baseline anomaly detection over per-window feature vectors.

Each time window is summarized into a fixed-order statistic vector.  A
baseline is a sliding set of standardized vectors whose persistence diagram is
cached; a new window is scored by how much adding its vector perturbs that
diagram (summed Wasserstein distance over homology dimensions).  Scores above
the calibrated threshold flag the window and leave the baseline untouched;
otherwise the oldest point rotates out.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .flows import TimeWindow
from .hypergraph import build_hypergraph, stats
from .persistence import PersistenceDiagram, barcode, vietoris_rips, wasserstein
from .topology import betti, build_ecp, order_complex

FEATURE_NAMES = (
    "n_records",
    "n_unique_sIP",
    "n_unique_dPort",
    "max_edge_size",
    "mean_edge_size",
    "max_ecp_in_degree",
    "max_ecp_out_degree",
    "rbs_beta0",
    "rbs_beta1",
    "max_support_multiplicity",
)

DEFAULTS = {
    "capacity": 20,
    "window_width": 300.0,
    "max_eps": 20.0,
    "max_dim": 1,
    "quantile": 0.99,
    "features": list(FEATURE_NAMES),
}

THRESHOLD_SLACK = 1.5


@dataclass(frozen=True)
class FeatureVector:
    """Statistic vector of one time window; coordinate order is run-wide."""

    window_start: float
    values: tuple[float, ...]


@dataclass(frozen=True)
class AnomalyReport:
    window_start: float
    score: float
    threshold: float
    anomalous: bool
    attribution: str | None

    def to_json(self) -> str:
        return json.dumps({
            "window_start": self.window_start,
            "score": self.score,
            "threshold": self.threshold,
            "anomalous": self.anomalous,
            "attribution": self.attribution,
        })


def window_statistics(w: TimeWindow) -> dict[str, float]:
    """All supported per-window statistics, keyed by feature name."""
    h = build_hypergraph(w)
    st = stats(h)
    ecp = build_ecp(h)
    rbs = order_complex(ecp, max_dim=2)
    if rbs.count(0):
        b0, b1 = betti(rbs, 1)
    else:
        b0, b1 = 0, 0
    return {
        "n_records": float(len(w.sessions)),
        "n_unique_sIP": float(len({s.client_ip for s in w.sessions})),
        "n_unique_dPort": float(len({s.server_port for s in w.sessions})),
        "max_edge_size": float(st.max_edge_size),
        "mean_edge_size": float(st.mean_edge_size),
        "max_ecp_in_degree": float(ecp.max_in_degree()),
        "max_ecp_out_degree": float(ecp.max_out_degree()),
        "rbs_beta0": float(b0),
        "rbs_beta1": float(b1),
        "max_support_multiplicity": float(st.max_support_multiplicity),
    }


def summarize_window(w: TimeWindow, features=FEATURE_NAMES) -> FeatureVector:
    """Project the window's statistics onto the configured coordinate order."""
    all_stats = window_statistics(w)
    unknown = [f for f in features if f not in all_stats]
    if unknown:
        raise ValueError(f"unknown feature name(s): {unknown}")
    return FeatureVector(window_start=w.start,
                         values=tuple(all_stats[f] for f in features))


@dataclass(frozen=True)
class Baseline:
    """Sliding reference set of standardized vectors with a cached diagram.

    Standardization parameters are frozen at initialization so later
    anomalies cannot shift the scale they are judged against.  The cached
    diagram is always the truncated barcode of the current points.
    """

    points: tuple[tuple[float, ...], ...]
    mean: tuple[float, ...]
    std: tuple[float, ...]
    max_eps: float
    max_dim: int
    feature_names: tuple[str, ...]
    diagram: PersistenceDiagram

    @property
    def capacity(self) -> int:
        return len(self.points)

    def standardize(self, v: FeatureVector) -> tuple[float, ...]:
        if len(v.values) != len(self.mean):
            raise ValueError(
                f"vector has {len(v.values)} coordinates, baseline expects {len(self.mean)}")
        return tuple((x - m) / s for x, m, s in zip(v.values, self.mean, self.std))


def cloud_diagram(points, max_eps: float, max_dim: int) -> PersistenceDiagram:
    """Truncated diagram of a standardized point cloud, dims 0..max_dim."""
    filtration = vietoris_rips(points, max_eps=max_eps, max_dim=max_dim)
    return barcode(filtration).restrict(max_dim).truncate(max_eps)


def init_baseline(vectors, capacity: int, max_eps: float, max_dim: int,
                  features=FEATURE_NAMES) -> Baseline:
    """Fit standardization on anomaly-free vectors and cache their diagram."""
    vectors = list(vectors)
    if capacity < 3:
        raise ValueError("baseline capacity must be >= 3")
    if len(vectors) != capacity:
        raise ValueError(f"need exactly {capacity} vectors, got {len(vectors)}")
    raw = np.array([v.values for v in vectors], dtype=float)
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)
    std[std == 0.0] = 1.0
    points = tuple(tuple(row) for row in (raw - mean) / std)
    diagram = cloud_diagram(points, max_eps, max_dim)
    return Baseline(points=points, mean=tuple(mean), std=tuple(std),
                    max_eps=max_eps, max_dim=max_dim,
                    feature_names=tuple(features), diagram=diagram)


def _distance(diag_a: PersistenceDiagram, diag_b: PersistenceDiagram,
              max_dim: int) -> float:
    return math.fsum(wasserstein(diag_a, diag_b, dim=k, p=1.0)
                     for k in range(max_dim + 1))


def _score_standardized(b: Baseline, z: tuple[float, ...]) -> float:
    with_z = cloud_diagram(b.points + (z,), b.max_eps, b.max_dim)
    return _distance(with_z, b.diagram, b.max_dim)


def score_window(b: Baseline, v: FeatureVector) -> float:
    """Wasserstein perturbation of the baseline diagram when v is added."""
    return _score_standardized(b, b.standardize(v))


def calibrate_threshold(b: Baseline, quantile: float = 0.99) -> float:
    """Leave-one-out threshold: each point scored against the rest.

    The threshold is the requested quantile of those scores times a slack
    factor, so the baseline's own variability does not self-flag.
    """
    if not 0.0 < quantile <= 1.0:
        raise ValueError("quantile must be in (0, 1]")
    scores = []
    for i in range(len(b.points)):
        reduced = b.points[:i] + b.points[i + 1:]
        reduced_diagram = cloud_diagram(reduced, b.max_eps, b.max_dim)
        scores.append(_distance(b.diagram, reduced_diagram, b.max_dim))
    return THRESHOLD_SLACK * float(np.quantile(scores, quantile))


def attribute(b: Baseline, v: FeatureVector) -> str:
    """Name the coordinate whose removal most reduces the anomaly score.

    Each coordinate in turn is replaced by the baseline's mean for that
    coordinate and the vector is re-scored; the biggest drop wins, with ties
    going to the lowest index.
    """
    z = np.array(b.standardize(v))
    col_means = np.array(b.points).mean(axis=0)
    best_idx = 0
    best_score = math.inf
    for i in range(len(z)):
        probe = z.copy()
        probe[i] = col_means[i]
        s = _score_standardized(b, tuple(probe))
        if s < best_score:
            best_score = s
            best_idx = i
    return b.feature_names[best_idx]


def step(b: Baseline, v: FeatureVector, threshold: float) -> tuple[AnomalyReport, Baseline]:
    """Score one window and, if it is normal, rotate it into the baseline.

    Anomalous windows are reported with an attribution and the baseline is
    returned unchanged; normal windows replace the oldest point and the
    cached diagram is recomputed.
    """
    z = b.standardize(v)
    score = _score_standardized(b, z)
    anomalous = score > threshold
    if anomalous:
        report = AnomalyReport(window_start=v.window_start, score=score,
                               threshold=threshold, anomalous=True,
                               attribution=attribute(b, v))
        return report, b
    new_points = b.points[1:] + (z,)
    new_baseline = Baseline(points=new_points, mean=b.mean, std=b.std,
                            max_eps=b.max_eps, max_dim=b.max_dim,
                            feature_names=b.feature_names,
                            diagram=cloud_diagram(new_points, b.max_eps, b.max_dim))
    report = AnomalyReport(window_start=v.window_start, score=score,
                           threshold=threshold, anomalous=False, attribution=None)
    return report, new_baseline


def run_detector(vectors, capacity: int, max_eps: float, max_dim: int,
                 quantile: float = 0.99,
                 features=FEATURE_NAMES) -> list[AnomalyReport]:
    """Initialize from the first `capacity` vectors, then score the rest."""
    vectors = list(vectors)
    if len(vectors) < capacity:
        raise ValueError(
            f"need at least {capacity} vectors to establish a baseline, "
            f"got {len(vectors)}")
    baseline = init_baseline(vectors[:capacity], capacity, max_eps, max_dim,
                             features=features)
    threshold = calibrate_threshold(baseline, quantile)
    reports = []
    for v in vectors[capacity:]:
        report, baseline = step(baseline, v, threshold)
        reports.append(report)
    return reports


CONFIG_KEYS = {
    "capacity": int,
    "window_width": float,
    "max_eps": float,
    "max_dim": int,
    "quantile": float,
    "features": None,
}


def parse_config(text: str) -> dict:
    """Parse `key = value` config lines; `#` starts a comment.

    `features` takes a comma-separated list of coordinate names; the other
    keys are numeric.  Unknown keys are rejected.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected `key = value`, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key == "features":
            out[key] = [f.strip() for f in value.split(",") if f.strip()]
        else:
            try:
                out[key] = CONFIG_KEYS[key](value)
            except ValueError:
                raise ValueError(
                    f"config line {lineno}: bad value {value!r} for {key}") from None
    return out

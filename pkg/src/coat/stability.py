"""Bootstrap stability of COAT correlation networks."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .compositional import as_composition, clr
from .errors import ConfigurationError
from .estimator import ThresholdRule, covariance_and_theta, threshold_matrix
from .parallel import derive_seed, map_ordered, rng_for
from .selection import DEFAULT_FOLDS, DEFAULT_GRID_SIZE, cross_validate_scores

CSV_HEADER = ("source", "target", "correlation", "frequency", "retained")


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    correlation: float
    frequency: int
    retained: bool


@dataclass
class StabilityNetwork:
    """Base-network edges with bootstrap reproduction counts.

    ``stability`` is None when the base network has no edges.
    """

    edges: list
    B: int
    retained_threshold: int
    stability: float | None
    taxon_ids: tuple = ()
    chosen_lambda: float = float("nan")
    dropped_nonpositive_diagonal: int = 0
    clipped_correlations: int = 0
    replicate_lambdas: tuple = field(default=(), repr=False, compare=False)

    @property
    def retained(self) -> list:
        return [e for e in self.edges if e.retained]


def edge_sign_split(net: StabilityNetwork) -> tuple[int, int]:
    """(positive, negative) counts among retained edges; zero counts as positive."""
    pos = sum(1 for e in net.retained if e.correlation >= 0)
    return pos, len(net.retained) - pos


def _fit(z, rule, folds, seed, pd, preserve_diagonal, grid_size, lam=None):
    cov, theta = covariance_and_theta(z)
    if lam is None:
        cv = cross_validate_scores(
            z, folds=folds, rule=rule, seed=seed, preserve_diagonal=preserve_diagonal,
            pd=pd, grid_size=grid_size,
        )
        lam = cv.chosen_lambda
    return threshold_matrix(cov, np.sqrt(theta), lam, rule, preserve_diagonal), lam


def _support(m) -> set:
    iu = np.triu_indices(m.shape[0], k=1)
    nz = m[iu] != 0
    return set(zip(iu[0][nz].tolist(), iu[1][nz].tolist()))


def bootstrap_stability(
    x,
    rule="soft",
    folds: int = DEFAULT_FOLDS,
    B: int = 100,
    retain: int = 80,
    seed: int = 0,
    pd: bool = True,
    fixed_lambda: bool = False,
    preserve_diagonal: bool = False,
    grid_size: int = DEFAULT_GRID_SIZE,
    threads: int | None = None,
    resample=None,
) -> StabilityNetwork:
    """Edge frequencies of the CV-tuned COAT network over B bootstrap resamples.

    The base network is the off-diagonal support of the estimate on the full
    data. Each replicate draws n rows with replacement from a stream keyed by
    (seed, r) and re-tunes lambda by cross-validation, unless ``fixed_lambda``
    reuses the base lambda. Stability is the mean fraction of base edges a
    replicate reproduces.

    ``resample(rng, n)`` overrides the row sampler.
    """
    if B < 1:
        raise ConfigurationError(f"B must be >= 1, got {B}")
    if not 0 <= retain <= B:
        raise ConfigurationError(f"retain must lie in [0, B], got {retain}")
    rule = ThresholdRule.parse(rule)
    x = as_composition(x)
    z = clr(x)
    n = x.n
    resample = resample or (lambda rng, size: rng.integers(0, size, size))

    base, lam = _fit(z, rule, folds, derive_seed(seed, 0), pd, preserve_diagonal, grid_size)
    base_edges = sorted(_support(base))

    def replicate(r):
        rows = np.asarray(resample(rng_for(seed, 1, r), n))
        est, lam_r = _fit(
            z[rows], rule, folds, derive_seed(seed, 2, r), pd, preserve_diagonal, grid_size,
            lam=lam if fixed_lambda else None,
        )
        return _support(est), lam_r

    reps = map_ordered(replicate, range(B), threads)

    freq = {e: 0 for e in base_edges}
    props = []
    for support, _ in reps:
        for e in base_edges:
            if e in support:
                freq[e] += 1
        if base_edges:
            props.append(sum(e in support for e in base_edges) / len(base_edges))

    diag = np.diag(base)
    edges = []
    dropped = clipped = 0
    for i, j in base_edges:
        if diag[i] <= 0 or diag[j] <= 0:
            dropped += 1
            continue
        corr = base[i, j] / math.sqrt(diag[i] * diag[j])
        if abs(corr) > 1:
            clipped += 1
            corr = max(-1.0, min(1.0, corr))
        edges.append(Edge(i, j, float(corr), freq[(i, j)], freq[(i, j)] >= retain))
    if dropped:
        warnings.warn(f"{dropped} edges dropped: nonpositive diagonal in the base estimate")

    return StabilityNetwork(
        edges=edges,
        B=B,
        retained_threshold=retain,
        stability=float(np.mean(props)) if base_edges else None,
        taxon_ids=tuple(x.taxon_ids),
        chosen_lambda=float(lam),
        dropped_nonpositive_diagonal=dropped,
        clipped_correlations=clipped,
        replicate_lambdas=tuple(float(l) for _, l in reps),
    )


def _label(net, i):
    return net.taxon_ids[i] if net.taxon_ids else str(i)


def export_network(net: StabilityNetwork, fmt: str = "edge_csv") -> bytes:
    """Serialize a network as an edge CSV or JSON document."""
    if fmt == "edge_csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for e in net.edges:
            w.writerow([_label(net, e.i), _label(net, e.j), f"{e.correlation:.6f}",
                        e.frequency, int(e.retained)])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        doc = {
            "B": net.B,
            "retain": net.retained_threshold,
            "stability": net.stability,
            "chosen_lambda": net.chosen_lambda,
            "taxon_ids": list(net.taxon_ids),
            "dropped_nonpositive_diagonal": net.dropped_nonpositive_diagonal,
            "clipped_correlations": net.clipped_correlations,
            "edges": [
                {
                    "i": e.i,
                    "j": e.j,
                    "source": _label(net, e.i),
                    "target": _label(net, e.j),
                    "correlation": e.correlation,
                    "frequency": e.frequency,
                    "retained": e.retained,
                }
                for e in net.edges
            ],
        }
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")
    raise ConfigurationError(f"unknown export format {fmt!r}")


def network_from_json(data) -> StabilityNetwork:
    doc = json.loads(data)
    return StabilityNetwork(
        edges=[Edge(e["i"], e["j"], e["correlation"], e["frequency"], e["retained"]) for e in doc["edges"]],
        B=doc["B"],
        retained_threshold=doc["retain"],
        stability=doc["stability"],
        taxon_ids=tuple(doc["taxon_ids"]),
        chosen_lambda=doc["chosen_lambda"],
        dropped_nonpositive_diagonal=doc["dropped_nonpositive_diagonal"],
        clipped_correlations=doc["clipped_correlations"],
    )

"""Full latent correlation matrix: per-pair case dispatch, then PSD repair."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._numerics import clamp_corr
from .continuous import pearson, spearman_rho, spearman_to_latent
from .data import MixedDataset, Ordinal
from .errors import MixedGraphError, ValidationError
from .polychoric import contingency_table, polychoric_mle
from .polyserial import PolyserialProblem, polyserial_adhoc, polyserial_mle
from .projection import nearest_psd_correlation
from .thresholds import estimate_threshold_set
from .transform import estimate_transform

FAMILIES = ("mle", "poly")

METHOD_TAGS = {
    ("mle", "case1"): "case1-pearson",
    ("poly", "case1"): "case1-spearman",
    ("mle", "case2"): "case2-mle",
    ("poly", "case2"): "case2-adhoc",
    ("mle", "case3"): "case3-polychoric",
    ("poly", "case3"): "case3-polychoric",
}


@dataclass(frozen=True, eq=False)
class LatentCorrelationMatrix:
    values: np.ndarray
    names: tuple
    methods: tuple  # d x d nested tuple of tags; "" on the diagonal
    family: str
    repaired: bool = False

    @property
    def d(self):
        return self.values.shape[0]

    def to_dict(self):
        return {
            "family": self.family,
            "repaired": self.repaired,
            "names": list(self.names),
            "method_tags": [list(row) for row in self.methods],
            "values": [[float(v) for v in row] for row in self.values],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, doc):
        values = np.array(doc["values"], dtype=float)
        return cls(values, tuple(doc["names"]), tuple(tuple(r) for r in doc["method_tags"]),
                   doc["family"], bool(doc.get("repaired", False)))

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + list(self.names))
            for name, row in zip(self.names, self.values):
                w.writerow([name] + [repr(float(v)) for v in row])


class _PairEstimator:
    """Caches per-column quantities shared by all pairs touching a column."""

    def __init__(self, dataset: MixedDataset, family: str):
        self.ds = dataset
        self.family = family
        self.thresholds = estimate_threshold_set(dataset)
        self.transforms = {}
        if family == "poly":
            for k in dataset.continuous_indices:
                self.transforms[k] = estimate_transform(dataset.column(k))

    def case(self, j, k):
        oj = isinstance(self.ds.kinds[j], Ordinal)
        ok = isinstance(self.ds.kinds[k], Ordinal)
        return "case3" if (oj and ok) else "case2" if (oj or ok) else "case1"

    def __call__(self, pair):
        j, k = pair
        ds = self.ds
        case = self.case(j, k)
        try:
            if case == "case1":
                x, y = ds.column(j), ds.column(k)
                est = pearson(x, y) if self.family == "mle" else spearman_to_latent(spearman_rho(x, y))
            elif case == "case3":
                tj, tk = self.thresholds[j], self.thresholds[k]
                table = contingency_table(ds.column(j), ds.column(k), tj.levels, tk.levels)
                est = polychoric_mle(table, tj.gammas, tk.gammas)
            else:
                o, c = (j, k) if isinstance(ds.kinds[j], Ordinal) else (k, j)
                th = self.thresholds[o]
                if self.family == "mle":
                    problem = PolyserialProblem.from_columns(ds.column(o), th.levels, ds.column(c), th)
                    est = polyserial_mle(problem)
                else:
                    est = polyserial_adhoc(ds.column(o), ds.column(c), th, self.transforms[c])
        except MixedGraphError as exc:
            raise exc.with_pair((j, k), ds.names) from exc
        return clamp_corr(est), METHOD_TAGS[(self.family, case)]


def estimate_latent_correlation(dataset, family="poly", threads=1):
    """Pairwise latent correlation estimate (not yet PSD-repaired).

    Parameters
    ----------
    dataset : MixedDataset
    family : {"mle", "poly"}
        ``"mle"``: Pearson / polyserial MLE / polychoric MLE (latent Gaussian).
        ``"poly"``: Spearman bridge / ad hoc polyserial / polychoric MLE
        (latent Gaussian copula).
    threads : int or None
        Worker threads for pair estimation; ``None`` uses all logical cores.
        The result does not depend on this value.
    """
    if family not in FAMILIES:
        raise ValidationError(f"family must be one of {FAMILIES}, got {family!r}")
    est = _PairEstimator(dataset, family)
    d = dataset.d
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    workers = (os.cpu_count() or 1) if threads is None else max(1, int(threads))
    if workers == 1:
        results = [est(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(est, pairs))
    values = np.eye(d)
    methods = [["" for _ in range(d)] for _ in range(d)]
    for (j, k), (v, tag) in zip(pairs, results):
        values[j, k] = values[k, j] = v
        methods[j][k] = methods[k][j] = tag
    values.setflags(write=False)
    return LatentCorrelationMatrix(values, dataset.names, tuple(tuple(r) for r in methods), family)


def repair(lcm: LatentCorrelationMatrix) -> LatentCorrelationMatrix:
    """Project onto the nearest correlation matrix; tags and names carry over."""
    fixed = nearest_psd_correlation(lcm.values)
    fixed.setflags(write=False)
    return replace(lcm, values=fixed, repaired=True)

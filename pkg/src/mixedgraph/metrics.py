"""Estimation error and edge-recovery metrics along a glasso path."""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .glasso import EDGE_EPS

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def frobenius_error(omega_hat, omega_star):
    a = np.asarray(omega_hat, dtype=float)
    b = np.asarray(omega_star, dtype=float)
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b, "fro"))


def _lower_support(m, edge_eps):
    m = np.asarray(m, dtype=float)
    return np.abs(m[np.tril_indices(m.shape[0], -1)]) > edge_eps


def tp_fp(omega_hat, omega_star, edge_eps=EDGE_EPS):
    """True and false positive counts over the strict lower triangle."""
    if np.shape(omega_hat) != np.shape(omega_star):
        raise ValidationError("shape mismatch")
    est = _lower_support(omega_hat, edge_eps)
    true = _lower_support(omega_star, edge_eps)
    return int(np.sum(est & true)), int(np.sum(est & ~true))


@dataclass(frozen=True)
class RocCurve:
    lambdas: tuple
    tpr: tuple
    fpr: tuple
    auc: float

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lambda", "tpr", "fpr"])
            for lam, t, f in zip(self.lambdas, self.tpr, self.fpr):
                w.writerow([repr(lam), repr(t), repr(f)])


def roc_points(omegas, omega_star, edge_eps=EDGE_EPS):
    d = np.shape(omega_star)[0]
    n_true = int(np.sum(_lower_support(omega_star, edge_eps)))
    n_null = d * (d - 1) // 2 - n_true
    if n_true == 0 or n_null == 0:
        raise ValidationError("ROC undefined for an empty or complete true graph")
    tpr, fpr = [], []
    for om in omegas:
        tp, fp = tp_fp(om, omega_star, edge_eps)
        tpr.append(tp / n_true)
        fpr.append(fp / n_null)
    return np.array(tpr), np.array(fpr)


def auc_from_points(tpr, fpr):
    """Trapezoid area with (0,0) and (1,1) appended; equal FPRs keep the best TPR."""
    f = np.concatenate(([0.0], np.asarray(fpr, dtype=float), [1.0]))
    t = np.concatenate(([0.0], np.asarray(tpr, dtype=float), [1.0]))
    uf = np.unique(f)
    ut = np.array([t[f == x].max() for x in uf])
    return float(_trapezoid(ut, uf))


def roc_auc(path, omega_star, edge_eps=EDGE_EPS):
    """ROC curve of a :class:`~mixedgraph.glasso.PrecisionPath` against the true graph."""
    tpr, fpr = roc_points([s.omega for s in path.solutions], omega_star, edge_eps)
    return RocCurve(
        lambdas=tuple(float(x) for x in path.lambdas),
        tpr=tuple(float(x) for x in tpr),
        fpr=tuple(float(x) for x in fpr),
        auc=auc_from_points(tpr, fpr),
    )

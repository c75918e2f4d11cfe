import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixedgraph.errors import ValidationError
from mixedgraph.glasso import select_model
from mixedgraph.latent import estimate_latent_correlation, repair
from mixedgraph.metrics import auc_from_points, frobenius_error, roc_auc, roc_points, tp_fp
from mixedgraph.simulation import GraphSpec, MixSpec, generate_graph, make_rng, sample_mixed


def test_frobenius():
    a = np.random.default_rng(0).normal(size=(3, 3))
    b = np.random.default_rng(1).normal(size=(3, 3))
    assert frobenius_error(a, a) == 0.0
    assert frobenius_error(np.eye(4) * 2, np.eye(4)) == pytest.approx(2.0)
    brute = sum((a[i, j] - b[i, j]) ** 2 for i in range(3) for j in range(3)) ** 0.5
    assert frobenius_error(a, b) == pytest.approx(brute, rel=1e-14)
    with pytest.raises(ValidationError):
        frobenius_error(np.eye(2), np.eye(3))


def test_tp_fp():
    star = np.eye(4)
    star[1, 0] = star[0, 1] = 0.2
    star[3, 2] = star[2, 3] = 0.2
    assert tp_fp(star, star) == (2, 0)
    assert tp_fp(np.eye(4), star) == (0, 0)
    hat = star.copy()
    hat[2, 0] = hat[0, 2] = -0.1
    assert tp_fp(hat, star) == (2, 1)
    upper_only = np.triu(hat)
    assert tp_fp(upper_only, star) == (0, 0)  # only the lower triangle is read
    assert tp_fp(np.tril(hat), star) == (2, 1)


def test_auc_examples():
    assert auc_from_points([1.0], [0.0]) == 1.0
    assert auc_from_points([0.0, 0.0], [0.0, 0.0]) == 0.5
    assert auc_from_points([0.5], [0.5]) == 0.5
    # ties in FPR keep the best TPR: points (0, 0.2) and (0, 0.6)
    assert auc_from_points([0.2, 0.6], [0.0, 0.0]) == pytest.approx(0.8)


def test_roc_undefined_for_trivial_truth():
    with pytest.raises(ValidationError):
        roc_points([np.eye(3)], np.eye(3))
    with pytest.raises(ValidationError):
        roc_points([np.eye(3)], np.ones((3, 3)))


def _polygon_area(tpr, fpr):
    pts = sorted(set(zip([0.0, *fpr, 1.0], [0.0, *tpr, 1.0])))
    best = {}
    for f, t in pts:
        best[f] = max(best.get(f, 0.0), t)
    xs = sorted(best)
    # shoelace over the curve closed along the x-axis
    poly = [(xs[0], 0.0)] + [(x, best[x]) for x in xs] + [(xs[-1], 0.0)]
    area = 0.0
    for (x1, y1), (x2, y2) in zip(poly, poly[1:] + poly[:1]):
        area += x1 * y2 - x2 * y1
    return abs(area) / 2


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=20))
def test_auc_matches_polygon_area_and_ignores_duplicates(points):
    tpr, fpr = [p[0] for p in points], [p[1] for p in points]
    auc = auc_from_points(tpr, fpr)
    assert 0.0 <= auc <= 1.0
    assert auc == pytest.approx(_polygon_area(tpr, fpr), abs=1e-12)
    assert auc_from_points(tpr + tpr, fpr + fpr) == auc


def test_roc_on_seeded_benchmark_path(tmp_path):
    gt = generate_graph(GraphSpec(50, target_edges=200, seed=21))
    sim = sample_mixed(gt, MixSpec.preset("ternary"), 200, make_rng(21, 0, 1))
    path = select_model(repair(estimate_latent_correlation(sim.dataset, "poly")).values, 200, 0.1)
    roc = roc_auc(path, gt.omega_star)
    assert len(roc.tpr) == len(path.lambdas) == 30
    assert roc.auc == pytest.approx(_polygon_area(roc.tpr, roc.fpr), abs=1e-12)
    assert 0.5 < roc.auc < 1.0
    roc.write_csv(tmp_path / "roc.csv")
    lines = (tmp_path / "roc.csv").read_text().splitlines()
    assert lines[0] == "lambda,tpr,fpr" and len(lines) == 31

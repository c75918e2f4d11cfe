"""Synthetic ground-truth graphs, mixed-data sampling and benchmark replicates.

Random streams come from ``numpy.random.Philox`` keyed by
``SeedSequence(seed, spawn_key=(replicate, purpose))`` so that every
replicate is reproducible on its own, independently of scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import stats

from .data import Continuous, MixedDataset, Ordinal
from .errors import MixedGraphError, NumericalError, ValidationError
from .glasso import kkt_residual, lambda_grid, select_model
from .latent import estimate_latent_correlation, repair
from .metrics import frobenius_error, roc_auc, tp_fp
from .special import std_normal_cdf, std_normal_quantile

RNG_ALGORITHM = "numpy.random.Philox-4x64-10/SeedSequence"
FAMILIES = ("oracle", "mle", "poly")
TRANSFORMS = ("identity", "cube")

_GRAPH_STREAM = 0
_SAMPLE_STREAM = 1
_PD_FLOOR = 0.01
_PD_ATTEMPTS = 50


def make_rng(seed, *key):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def default_theta(d):
    return 0.5 if d >= 750 else 0.1


@dataclass(frozen=True)
class GraphSpec:
    d: int
    s: float = 0.15
    c: float | None = None
    target_edges: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.d < 2:
            raise ValidationError("graph needs d >= 2")
        if not self.s > 0:
            raise ValidationError("signal strength s must be positive")
        if self.c is None and self.target_edges is None:
            raise ValidationError("give either the sparsity scale c or target_edges")
        if self.c is not None and not self.c > 0:
            raise ValidationError("sparsity scale c must be positive")
        if self.target_edges is not None and not 0 < self.target_edges < self.d * (self.d - 1) // 2:
            raise ValidationError("target_edges must lie strictly between 0 and d(d-1)/2")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    omega_star: np.ndarray
    sigma_star: np.ndarray
    edges: frozenset
    c: float
    positions: np.ndarray

    @property
    def n_edges(self):
        return len(self.edges)


def edge_probabilities(positions, c):
    """p_jk = (2 pi)^{-1/2} exp(-||v_j - v_k|| / (2c))."""
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    return np.exp(-dist / (2.0 * c)) / math.sqrt(2.0 * math.pi)


def _edges_for(c, positions, uniforms):
    return np.triu(uniforms < edge_probabilities(positions, c), 1)


def _bisect_c(positions, uniforms, target):
    lo, hi = -12.0, 12.0  # log c
    count = lambda lc: int(_edges_for(math.exp(lc), positions, uniforms).sum())
    if count(hi) < 0.9 * target:
        raise ValidationError(f"target of {target} edges is unreachable for d={positions.shape[0]}")
    for _ in range(200):
        mid = (lo + hi) / 2.0
        m = count(mid)
        if abs(m - target) <= 0.1 * target:
            return math.exp(mid)
        if m < target:
            lo = mid
        else:
            hi = mid
    return math.exp((lo + hi) / 2.0)


def generate_graph(spec: GraphSpec) -> GroundTruth:
    """Random geometric precision matrix with unit diagonal and off-diagonals ``s``.

    Node positions are uniform on the unit square; edge (j, k) is present
    with probability decaying in the node distance. Edge draws are repeated
    (fresh substream) until the precision matrix has minimum eigenvalue
    above 0.01.
    """
    d = spec.d
    base = make_rng(spec.seed, _GRAPH_STREAM)
    positions = base.uniform(size=(d, 2))
    for attempt in range(_PD_ATTEMPTS):
        rng = make_rng(spec.seed, _GRAPH_STREAM, attempt + 1)
        uniforms = rng.uniform(size=(d, d))
        c = spec.c if spec.target_edges is None else _bisect_c(positions, uniforms, spec.target_edges)
        upper = _edges_for(c, positions, uniforms)
        adj = upper | upper.T
        omega = np.eye(d) + spec.s * adj
        if np.linalg.eigvalsh(omega)[0] > _PD_FLOOR:
            break
    else:
        raise NumericalError(
            f"no positive definite precision matrix after {_PD_ATTEMPTS} attempts; "
            "use a smaller signal strength s or sparsity scale c"
        )
    sigma = np.linalg.inv(omega)
    scale = 1.0 / np.sqrt(np.diag(sigma))
    sigma = sigma * scale[:, None] * scale[None, :]
    sigma = (sigma + sigma.T) / 2.0
    np.fill_diagonal(sigma, 1.0)
    j, k = np.nonzero(upper)
    return GroundTruth(omega, sigma, frozenset(zip(j.tolist(), k.tolist())), float(c), positions)


@dataclass(frozen=True)
class MixSpec:
    """Column composition of a simulated dataset.

    Shares are fractions of ``d`` for each column group; discrete groups come
    first in the column order (binary, ordinal, Poisson), then continuous.
    ``transform="cube"`` applies the back-transform x -> x**3 to every column
    (for discrete columns it is transported through the thresholds, so it
    leaves their observed values unchanged).
    """

    binary: float = 1 / 6
    ordinal: float = 1 / 6
    poisson: float = 1 / 6
    continuous: float = 1 / 2
    balanced_range: tuple = (0.4, 0.6)
    unbalanced_range: tuple = (0.05, 0.1)
    unbalanced_fraction: float = 0.2
    ordinal_categories: tuple = (3, 7)
    poisson_rate: float = 6.0
    transform: str = "identity"

    def __post_init__(self):
        shares = (self.binary, self.ordinal, self.poisson, self.continuous)
        if min(shares) < 0 or abs(sum(shares) - 1.0) > 1e-9:
            raise ValidationError("column shares must be nonnegative and sum to 1")
        if self.transform not in TRANSFORMS:
            raise ValidationError(f"transform must be one of {TRANSFORMS}")
        lo, hi = self.ordinal_categories
        if not 2 <= lo <= hi:
            raise ValidationError("ordinal categories need 2 <= low <= high")

    @classmethod
    def preset(cls, name, **overrides):
        presets = {
            "general": {},
            "binary": dict(binary=0.5, ordinal=0.0, poisson=0.0, continuous=0.5),
            "ternary": dict(binary=0.25, ordinal=0.25, poisson=0.0, continuous=0.5,
                            ordinal_categories=(3, 3)),
            "continuous": dict(binary=0.0, ordinal=0.0, poisson=0.0, continuous=1.0),
        }
        if name not in presets:
            raise ValidationError(f"unknown mix preset {name!r}; choose from {sorted(presets)}")
        return cls(**{**presets[name], **overrides})

    def group_sizes(self, d):
        shares = np.array([self.binary, self.ordinal, self.poisson, self.continuous])
        raw = shares * d
        sizes = np.floor(raw).astype(int)
        for i in np.argsort(-(raw - sizes), kind="stable")[: d - sizes.sum()]:
            sizes[i] += 1
        return dict(zip(("binary", "ordinal", "poisson", "continuous"), sizes.tolist()))


def back_transform(x, transform):
    return x ** 3 if transform == "cube" else x


def discretize(values, cutpoints, levels):
    """Level r is taken when cut[r-1] <= value < cut[r]."""
    return np.asarray(levels, dtype=float)[np.searchsorted(cutpoints, values, side="right")]


def _column_plans(mix, d, rng):
    sizes = mix.group_sizes(d)
    plans = []
    n_unbal = int(round(mix.unbalanced_fraction * sizes["binary"]))
    for i in range(sizes["binary"]):
        rng_range = mix.unbalanced_range if i >= sizes["binary"] - n_unbal else mix.balanced_range
        p = rng.uniform(*rng_range)
        plans.append(("binary", np.array([std_normal_quantile(1.0 - p)]), np.array([0.0, 1.0])))
    lo, hi = mix.ordinal_categories
    for _ in range(sizes["ordinal"]):
        k = int(round(rng.uniform(lo, hi)))
        probs = np.arange(1, k + 1, dtype=float)
        cum = np.cumsum(probs / probs.sum())[:-1]
        plans.append(("ordinal", np.asarray(std_normal_quantile(cum)).reshape(-1), np.arange(k, dtype=float)))
    for _ in range(sizes["poisson"]):
        top = int(stats.poisson.ppf(1.0 - 1e-15, mix.poisson_rate))
        cum = stats.poisson.cdf(np.arange(top), mix.poisson_rate)
        cum = cum[(cum > 0.0) & (cum < 1.0)]
        first = top - cum.size
        plans.append(("poisson", np.asarray(std_normal_quantile(cum)).reshape(-1),
                      np.arange(first, top + 1, dtype=float)))
    plans.extend(("continuous", None, None) for _ in range(sizes["continuous"]))
    return plans


@dataclass(frozen=True, eq=False)
class SimulatedData:
    dataset: MixedDataset
    latent: MixedDataset
    cutpoints: tuple  # latent-scale cut-points per column, None for continuous


def sample_mixed(gt: GroundTruth, mix: MixSpec, n: int, rng) -> SimulatedData:
    """Draw ``n`` rows from N(0, Sigma*) and discretize by inverse probability transform."""
    d = gt.sigma_star.shape[0]
    if n < 2:
        raise ValidationError("need n >= 2")
    if isinstance(rng, (int, np.integer)):
        rng = make_rng(int(rng), _SAMPLE_STREAM)
    plans = _column_plans(mix, d, rng)
    try:
        chol = np.linalg.cholesky(gt.sigma_star)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Cholesky factorization of Sigma* failed") from exc
    z = rng.standard_normal((n, d)) @ chol.T
    values = np.empty_like(z)
    kinds, cuts, names = [], [], []
    for j, (group, cut, levels) in enumerate(plans):
        x = back_transform(z[:, j], mix.transform)
        if group == "continuous":
            values[:, j] = x
            kinds.append(Continuous())
            cuts.append(None)
        else:
            values[:, j] = discretize(x, back_transform(cut, mix.transform), levels)
            kinds.append(Ordinal(tuple(np.unique(values[:, j]))) if np.ptp(values[:, j]) > 0
                         else Ordinal((values[0, j], values[0, j] + 1.0)))
            cuts.append(cut)
        names.append(f"{group[:3]}{j + 1}")
    dataset = MixedDataset(values, tuple(kinds), tuple(names))
    latent = MixedDataset(z, tuple(Continuous() for _ in range(d)), tuple(names))
    return SimulatedData(dataset, latent, tuple(cuts))


@dataclass(frozen=True)
class BenchConfig:
    d: int = 50
    n: int = 200
    replicates: int = 20
    s: float = 0.15
    target_edges: int | None = 200
    c: float | None = None
    mix: MixSpec = field(default_factory=MixSpec)
    families: tuple = FAMILIES
    theta: float | None = None
    grid_size: int = 30
    seed: int = 1

    def __post_init__(self):
        bad = [f for f in self.families if f not in FAMILIES]
        if bad:
            raise ValidationError(f"unknown estimator families {bad}")
        if self.theta is not None and not 0.0 <= self.theta <= 1.0:
            raise ValidationError("theta must lie in [0, 1]")
        if self.replicates < 1 or self.n < 2 or self.grid_size < 2:
            raise ValidationError("need replicates >= 1, n >= 2 and grid_size >= 2")

    @property
    def effective_theta(self):
        return default_theta(self.d) if self.theta is None else self.theta

    def to_dict(self):
        out = asdict(self)
        out["families"] = list(self.families)
        out["theta"] = self.effective_theta
        return out


def fit_family(sim: SimulatedData, family, n, theta, grid_size):
    """Correlation estimate, repair and eBIC-selected glasso path for one family."""
    if family == "oracle":
        lcm = estimate_latent_correlation(sim.latent, "poly")
    else:
        lcm = estimate_latent_correlation(sim.dataset, family)
    sigma = repair(lcm).values
    path = select_model(sigma, n, theta, lambda_grid(sigma, grid_size))
    return sigma, path


def _path_diagnostics(sigma, path):
    kkt = max(kkt_residual(sigma, s.w, s.omega, s.lam) for s in path.solutions)
    inv = max(float(np.abs(s.omega @ s.w - np.eye(sigma.shape[0])).max()) for s in path.solutions)
    return kkt, inv, path.solutions[0].n_edges


def run_replicate(config: BenchConfig, rep: int) -> dict:
    spec = GraphSpec(config.d, config.s, config.c, config.target_edges, seed=config.seed)
    record = {"replicate": rep}
    try:
        gt = generate_graph(_replicate_spec(spec, rep))
        sim = sample_mixed(gt, config.mix, config.n, make_rng(config.seed, rep, _SAMPLE_STREAM))
    except MixedGraphError as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
        return record
    record["true_edges"] = gt.n_edges
    record["c"] = gt.c
    results = {}
    for fam in config.families:
        try:
            sigma, path = fit_family(sim, fam, config.n, config.effective_theta, config.grid_size)
        except MixedGraphError as exc:
            results[fam] = {"error": f"{type(exc).__name__}: {exc}"}
            continue
        roc = roc_auc(path, gt.omega_star)
        tp, fp = tp_fp(path.best.omega, gt.omega_star)
        n_null = config.d * (config.d - 1) // 2 - gt.n_edges
        kkt, inv, edges_at_max = _path_diagnostics(sigma, path)
        results[fam] = {
            "frobenius": frobenius_error(path.best.omega, gt.omega_star),
            "auc": roc.auc,
            "tpr": tp / gt.n_edges,
            "fpr": fp / n_null,
            "selected_lambda": path.best.lam,
            "selected_edges": path.best.n_edges,
            "roc": {"lambda": list(roc.lambdas), "tpr": list(roc.tpr), "fpr": list(roc.fpr)},
            "max_kkt_residual": kkt,
            "max_inverse_error": inv,
            "edges_at_lambda_max": edges_at_max,
        }
    record["families"] = results
    return record


def _replicate_spec(spec, rep):
    # graph seed derived from (seed, replicate) so replicates differ but are reproducible
    child = np.random.SeedSequence(spec.seed, spawn_key=(rep, _GRAPH_STREAM)).generate_state(2, np.uint32)
    return replace(spec, seed=int(child[0]) << 32 | int(child[1]))


def _aggregate(records, families):
    agg = {}
    for fam in families:
        rows = [r["families"][fam] for r in records if "families" in r and "error" not in r["families"].get(fam, {"error": 1})]
        entry = {"replicates": len(rows)}
        for key in ("frobenius", "auc", "tpr", "fpr", "selected_edges"):
            vals = np.array([row[key] for row in rows], dtype=float)
            entry[key] = {
                "mean": float(vals.mean()) if vals.size else None,
                "sd": float(vals.std(ddof=1)) if vals.size > 1 else None,
            }
        agg[fam] = entry
    return agg


def run_benchmark(config: BenchConfig, workers: int = 1) -> dict:
    """Run all replicates and aggregate; the report does not depend on ``workers``."""
    reps = range(config.replicates)
    if workers > 1 and config.replicates > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_replicate, [config] * config.replicates, reps))
    else:
        records = [run_replicate(config, r) for r in reps]
    failures = [
        {"replicate": r["replicate"], "family": fam, "error": res["error"]}
        for r in records for fam, res in r.get("families", {}).items() if "error" in res
    ] + [{"replicate": r["replicate"], "error": r["error"]} for r in records if "error" in r]
    return {
        "config": config.to_dict(),
        "rng": RNG_ALGORITHM,
        "replicates": records,
        "aggregates": _aggregate(records, config.families),
        "failures": failures,
    }

"""Fault injection and transfer simulation.

A fault assignment gives every component a per-transfer corruption
probability.  A transfer along a route is corrupted if any component on
the route corrupts it; components act independently.  Host corruption
(file level) and interface corruption (packet level) are both modelled as
one Bernoulli event per transfer.

Seeds
-----
All randomness comes from numpy's PCG64.  Sample ``(c, g, k)`` of
:func:`generate_dataset` (component index ``c``, grid index ``g``,
round ``k``) uses ``PCG64(SeedSequence([seed, c, g, k]))``, so samples can
be simulated in any order, or in parallel, with identical results.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import FaultLocError
from .topology import (
    PathIndex,
    RoutingTable,
    Topology,
    component_labels,
    compute_routes,
    path_index,
)

DEFAULT_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
DEFAULT_TRANSFERS = 100


def sample_rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, tags)])))


def path_failure_probability(route, error_prob) -> float:
    """Exact probability that a transfer along ``route`` is corrupted.

    ``route`` is a sequence of component indices and ``error_prob`` an
    array indexed by component.
    """
    if len(route) == 0:
        raise ValueError("route must be nonempty")
    probs = np.asarray(error_prob, dtype=float)[list(route)]
    # 1 - prod(1 - p), written to keep relative accuracy for tiny p
    with np.errstate(divide="ignore"):
        return float(-np.expm1(np.sum(np.log1p(-probs))))


def simulate_transfers(routes: RoutingTable, paths: PathIndex, error_prob,
                       transfers_per_pair: int, seed=None, rng=None) -> np.ndarray:
    """Fraction of corrupted transfers on each path.

    Either ``seed`` or an explicit ``rng`` must be given.  Components whose
    probability is zero consume no random draws.
    """
    if transfers_per_pair < 1:
        raise ValueError("transfers_per_pair must be >= 1")
    if rng is None:
        if seed is None:
            raise ValueError("simulate_transfers needs a seed or an rng")
        rng = sample_rng(seed)
    error_prob = np.asarray(error_prob, dtype=float)
    if np.any((error_prob < 0) | (error_prob > 1)):
        raise ValueError("error probabilities must lie in [0, 1]")
    row = np.zeros(len(paths))
    for p, pair in enumerate(paths.paths):
        comps = [c for c in routes[pair].components if error_prob[c] > 0]
        if not comps:
            continue
        draws = rng.random((transfers_per_pair, len(comps)))
        corrupted = (draws < error_prob[comps]).any(axis=1)
        row[p] = corrupted.sum() / transfers_per_pair
    return row


@dataclass
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    path_labels: list[str]
    component_labels: list[str]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.X.shape[0] != self.Y.shape[0]:
            raise FaultLocError("feature and label row counts differ")
        if self.X.shape[1] != len(self.path_labels):
            raise FaultLocError("feature columns do not match path labels")
        if self.Y.shape[1] != len(self.component_labels):
            raise FaultLocError("label columns do not match component labels")

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    def true_components(self) -> np.ndarray:
        """Index of the injected component per row (argmax of the label row)."""
        return np.argmax(self.Y, axis=1)

    def subset(self, rows) -> "Dataset":
        return Dataset(self.X[rows], self.Y[rows], self.path_labels,
                       self.component_labels, dict(self.provenance))

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        io.write_matrix(d / "features.csv", self.X, self.path_labels)
        io.write_matrix(d / "labels.csv", self.Y, self.component_labels)
        (d / "provenance.json").write_text(
            json.dumps(self.provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, directory) -> "Dataset":
        d = Path(directory)
        X, plabels = io.read_matrix(d / "features.csv")
        Y, clabels = io.read_matrix(d / "labels.csv")
        prov_path = d / "provenance.json"
        prov = json.loads(prov_path.read_text(encoding="utf-8")) if prov_path.exists() else {}
        return cls(X, Y, plabels, clabels, prov)


def generate_dataset(topology: Topology, error_grid=DEFAULT_GRID,
                     transfers_per_pair: int = DEFAULT_TRANSFERS,
                     rounds_per_cell: int = 1, seed: int = 0) -> Dataset:
    """Inject each grid probability into every component in turn.

    Rows are ordered by component, then grid value, then round.  Each label
    row holds the injected probability at the faulty component and zeros
    elsewhere.
    """
    grid = [float(g) for g in error_grid]
    if not grid:
        raise FaultLocError("error grid is empty")
    if any(not (0.0 < g <= 1.0) for g in grid):
        raise FaultLocError("error grid values must lie in (0, 1]")
    if transfers_per_pair < 1:
        raise FaultLocError("transfers_per_pair must be >= 1")
    if rounds_per_cell < 1:
        raise FaultLocError("rounds_per_cell must be >= 1")

    routes = compute_routes(topology)
    paths = path_index(topology)
    labels = component_labels(topology)
    n_comp = len(labels)
    n = n_comp * len(grid) * rounds_per_cell
    X = np.zeros((n, len(paths)))
    Y = np.zeros((n, n_comp))
    row = 0
    for c in range(n_comp):
        for g, prob in enumerate(grid):
            fault = np.zeros(n_comp)
            fault[c] = prob
            for k in range(rounds_per_cell):
                X[row] = simulate_transfers(routes, paths, fault, transfers_per_pair,
                                            rng=sample_rng(seed, c, g, k))
                Y[row, c] = prob
                row += 1
    provenance = {
        "topology": topology.name,
        "seed": int(seed),
        "transfers_per_pair": int(transfers_per_pair),
        "rounds_per_cell": int(rounds_per_cell),
        "error_grid": grid,
        "prng": "PCG64(SeedSequence([seed, component, grid_index, round]))",
    }
    return Dataset(X, Y, paths.labels, labels, provenance)

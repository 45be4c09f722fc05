"""Light-sensor localization on a W x W tile grid.

Tile ``(i, j)`` (1-based) has centre ``(i - 1/2, j - 1/2)``; ``i`` runs along
the horizontal axis and the light source lies on the bottom edge ``y = 0``.
Grids are stored as ``tiles[i - 1, j - 1]`` and flattened with ``i`` fastest.
Sensor ``d`` sees the closed triangle spanned by its position and the two
ends of the light source.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .data import Dataset, make_rng
from .errors import ConfigurationError, InputError


def points_in_triangle(points, a, b, c, tol: float = 1e-9) -> np.ndarray:
    """Closed point-in-triangle test via barycentric coordinates."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    denom = (b[1] - c[1]) * (a[0] - c[0]) + (c[0] - b[0]) * (a[1] - c[1])
    if abs(denom) < 1e-15:
        raise InputError("degenerate triangle")
    dx, dy = P[:, 0] - c[0], P[:, 1] - c[1]
    l1 = ((b[1] - c[1]) * dx + (c[0] - b[0]) * dy) / denom
    l2 = ((c[1] - a[1]) * dx + (a[0] - c[0]) * dy) / denom
    l3 = 1.0 - l1 - l2
    return (l1 >= -tol) & (l2 >= -tol) & (l3 >= -tol)


def boundary_positions(grid_w: int, n_sensors: int) -> np.ndarray:
    """Evenly spaced points along the left, top and right edges, corners excluded."""
    W = float(grid_w)
    out = []
    for k in range(n_sensors):
        s = 3.0 * W * (k + 0.5) / n_sensors
        if s < W:
            out.append((0.0, s))
        elif s < 2 * W:
            out.append((s - W, W))
        else:
            out.append((W, 3 * W - s))
    return np.array(out)


@dataclass(frozen=True, eq=False)
class Scenario:
    grid_w: int
    sensors: np.ndarray
    light_a: tuple
    light_b: tuple
    eps_fn: float = 0.15
    eps_fp: float = 0.01

    def __post_init__(self):
        if not (0 < self.eps_fn < 0.5 and 0 < self.eps_fp < 0.5):
            raise ConfigurationError("eps_fn and eps_fp must lie in (0, 0.5)")
        if self.grid_w < 1:
            raise ConfigurationError("grid_w must be positive")
        sensors = np.atleast_2d(np.asarray(self.sensors, dtype=float))
        object.__setattr__(self, "sensors", sensors)

    @property
    def n_sensors(self) -> int:
        return self.sensors.shape[0]

    @property
    def n_tiles(self) -> int:
        return self.grid_w * self.grid_w

    @cached_property
    def tile_centers(self) -> np.ndarray:
        """(W*W, 2) array of tile centres in i-fastest order."""
        half = np.arange(self.grid_w) + 0.5
        jj, ii = np.meshgrid(half, half, indexing="ij")
        return np.column_stack([ii.ravel(), jj.ravel()])

    @cached_property
    def zones(self) -> np.ndarray:
        """(D, W, W) boolean detection-zone membership, indexed [d, i-1, j-1]."""
        W = self.grid_w
        out = np.empty((self.n_sensors, W, W), dtype=bool)
        for d, s in enumerate(self.sensors):
            inside = points_in_triangle(self.tile_centers, s, self.light_a, self.light_b)
            out[d] = inside.reshape(W, W, order="F")
        return out

    def to_record(self) -> dict:
        return {
            "grid_w": self.grid_w,
            "sensors": self.sensors.tolist(),
            "light_a": list(self.light_a),
            "light_b": list(self.light_b),
            "eps_fn": self.eps_fn,
            "eps_fp": self.eps_fp,
        }


@dataclass(frozen=True, eq=False)
class Scene:
    tiles: np.ndarray

    def labels(self) -> np.ndarray:
        return grid_to_labels(self.tiles)


@dataclass(frozen=True, eq=False)
class MapEstimate:
    tiles: np.ndarray

    def hard_labels(self) -> np.ndarray:
        """Flattened 0/1 prediction with undecided (0.5) tiles scored as 0."""
        return grid_to_labels((self.tiles == 1.0).astype(np.uint8))


def grid_to_labels(tiles) -> np.ndarray:
    return np.asarray(tiles).reshape(-1, order="F")


def labels_to_grid(labels, grid_w: int) -> np.ndarray:
    return np.asarray(labels).reshape(grid_w, grid_w, order="F")


def build_scenario(grid_w: int, n_sensors: int, eps_fn: float = 0.15, eps_fp: float = 0.01) -> Scenario:
    if grid_w < 4:
        raise ConfigurationError("grid_w must be >= 4")
    if n_sensors < 1:
        raise ConfigurationError("n_sensors must be >= 1")
    return Scenario(
        grid_w=grid_w,
        sensors=boundary_positions(grid_w, n_sensors),
        light_a=(0.25 * grid_w, 0.0),
        light_b=(0.75 * grid_w, 0.0),
        eps_fn=eps_fn,
        eps_fp=eps_fp,
    )


def tile_count(scene: Scene, scenario: Scenario, d=None):
    """Active tiles inside sensor ``d``'s zone, or the vector over all sensors."""
    counts = np.tensordot(scenario.zones, np.asarray(scene.tiles, dtype=np.int64), axes=([1, 2], [0, 1]))
    return counts if d is None else int(counts[d])


def sensor_prob(c, scenario: Scenario):
    """Probability that a sensor fires given ``c`` active tiles in its zone."""
    c = np.asarray(c, dtype=float)
    p = np.where(
        c <= 0,
        scenario.eps_fp,
        np.where(c == 1, 1.0 - scenario.eps_fn, 1.0 - scenario.eps_fn * np.exp(-0.1 * (c - 1.0))),
    )
    return float(p) if p.ndim == 0 else p


def _draw_scene(scenario: Scenario, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    W = scenario.grid_w
    tiles = np.zeros((W, W), dtype=np.uint8)
    rect_w = max(1, math.floor(W / 8 + 0.5))
    i0, j0 = int(rng.integers(W)), int(rng.integers(W))
    i1, j1 = min(i0 + rect_w, W), min(j0 + 2, W)
    tiles[i0:i1, j0:j1] = 1
    cx = (i0 + i1) / 2.0
    cy = (j0 + j1) / 2.0
    corners = [(1.0, 1.0), (W - 1.0, 1.0), (1.0, W - 1.0), (W - 1.0, W - 1.0)]
    dist = [math.hypot(x - cx, y - cy) for x, y in corners]
    k = int(np.argmax(dist))
    si = 0 if corners[k][0] < W / 2 else W - 2
    sj = 0 if corners[k][1] < W / 2 else W - 2
    tiles[si:si + 2, sj:sj + 2] = 1
    clean = tiles.copy()
    flips = rng.choice(W * W, size=(W * W) // 100, replace=False)
    flat = tiles.reshape(-1)
    flat[flips] ^= 1
    return clean, tiles


def generate_scene(scenario: Scenario, seed: int = 0) -> Scene:
    """Rectangle of width round(W/8) and height 2, a 2x2 square in the corner
    farthest from it, then floor(W^2/100) random tile flips."""
    return Scene(_draw_scene(scenario, make_rng(seed))[1])


def _observe(scene_tiles, scenario, m, rng):
    p = sensor_prob(tile_count(Scene(scene_tiles), scenario), scenario)
    return (rng.random((scenario.n_sensors, m)) < p[:, None]).astype(np.uint8)


def sample_observations(scene: Scene, scenario: Scenario, m: int, seed: int = 0) -> np.ndarray:
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    return _observe(scene.tiles, scenario, m, make_rng(seed))


def map_estimate_from_means(theta, scenario: Scenario) -> MapEstimate:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (scenario.n_sensors,):
        raise InputError(f"expected {scenario.n_sensors} sensor means")
    est = np.full((scenario.grid_w, scenario.grid_w), 0.5)
    firing = theta > 0.5
    for d in np.flatnonzero(~firing):
        est[scenario.zones[d]] = 0.0
    for d in np.flatnonzero(firing):
        zone = scenario.zones[d]
        est[zone & (est == 0.5)] = 1.0
    return MapEstimate(est)


def map_estimate(observations, scenario: Scenario) -> MapEstimate:
    """Threshold each sensor's mean reading at 0.5, clear the zones of silent
    sensors, then mark the still-undecided tiles of firing sensors as occupied."""
    obs = np.asarray(observations)
    if obs.ndim != 2 or obs.shape[0] != scenario.n_sensors:
        raise InputError("observations must be a D x m matrix")
    return map_estimate_from_means(obs.mean(axis=1), scenario)


def generate_localization_instances(
    scenario: Scenario, n_instances: int, m_obs: int = 1, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Per-instance sensor means (N x D) and flattened noisy tile labels (N x W*W).

    Observations are drawn from the scene before the random tile flips.
    """
    if n_instances < 1 or m_obs < 1:
        raise ConfigurationError("n_instances and m_obs must be >= 1")
    children = np.random.SeedSequence(seed).spawn(n_instances)
    feats = np.empty((n_instances, scenario.n_sensors))
    labels = np.empty((n_instances, scenario.n_tiles), dtype=np.uint8)
    for n, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        clean, noisy = _draw_scene(scenario, rng)
        feats[n] = _observe(clean, scenario, m_obs, rng).mean(axis=1)
        labels[n] = grid_to_labels(noisy)
    return feats, labels


def generate_localization_dataset(
    grid_w: int,
    n_sensors: int,
    n_instances: int,
    m_obs: int = 1,
    seed: int = 0,
    eps_fn: float = 0.15,
    eps_fp: float = 0.01,
) -> Dataset:
    scenario = build_scenario(grid_w, n_sensors, eps_fn, eps_fp)
    feats, labels = generate_localization_instances(scenario, n_instances, m_obs, seed)
    W = grid_w
    label_names = [f"t{i + 1}_{j + 1}" for j in range(W) for i in range(W)]
    feature_names = [f"s{d + 1}" for d in range(n_sensors)]
    return Dataset(feats, labels, feature_names, label_names)

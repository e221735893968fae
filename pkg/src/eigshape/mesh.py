"""Structured polar triangulation of a star-shaped domain."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .curve import FourierBoundary, theta_grid


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Triangulation with boundary bookkeeping.

    ``node_rho``/``node_theta`` are the polar-chart coordinates of each node:
    node ``p`` sits at ``node_rho[p] * r(node_theta[p])`` along the ray
    ``node_theta[p]``. The boundary is the outermost ring (``rho == 1``).
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray
    boundary_theta: np.ndarray
    boundary_edges: np.ndarray
    node_rho: np.ndarray
    node_theta: np.ndarray
    n_r: int
    n_theta: int

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def interior_node_count(self) -> int:
        return self.n_nodes - len(self.boundary_nodes)

    @property
    def interior_nodes(self) -> np.ndarray:
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    def triangle_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def area(self) -> float:
        return float(np.sum(self.triangle_areas()))

    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def euler_characteristic(self) -> int:
        return self.n_nodes - len(self.edges()) + len(self.triangles)

    def check(self) -> None:
        """Raise ``ValueError`` if a structural invariant is broken."""
        if np.any(self.triangle_areas() <= 0):
            raise ValueError("mesh has non-positive triangle area")
        if len(np.unique(self.nodes, axis=0)) != self.n_nodes:
            raise ValueError("mesh has duplicate nodes")
        if self.euler_characteristic() != 1:
            raise ValueError("mesh is not a topological disk")
        e = self.boundary_edges
        if not np.array_equal(e[:, 1], np.roll(e[:, 0], -1)):
            raise ValueError("boundary edges do not form a cycle")
        if set(e[:, 0].tolist()) != set(self.boundary_nodes.tolist()):
            raise ValueError("boundary cycle misses boundary nodes")

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary": self.boundary_nodes.tolist(),
        }

    def dump(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)


def build_polar_mesh(fb: FourierBoundary, n_r: int = 32, n_theta: int = 128) -> TriangleMesh:
    """Polar mesh: a centre node plus ``n_r`` rings of ``n_theta`` nodes.

    Ring ``i`` sits at ``rho = i / n_r`` of the boundary radius. The centre is
    joined to the first ring by a fan; the quads between rings are split along
    alternating diagonals (checkerboard in ``(i, j)``).
    """
    if n_r < 4 or n_theta < 16:
        raise ValueError(f"need n_r >= 4 and n_theta >= 16, got {n_r}, {n_theta}")
    fb.validate(max(n_theta, 4096))

    theta = theta_grid(n_theta)
    r = fb.radius(theta)
    ray = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    rho = np.arange(1, n_r + 1) / n_r

    nodes = np.vstack([np.zeros((1, 2)), (rho[:, None, None] * ray[None]).reshape(-1, 2)])
    node_rho = np.concatenate([[0.0], np.repeat(rho, n_theta)])
    node_theta = np.concatenate([[0.0], np.tile(theta, n_r)])

    def idx(i, j):
        # ring i in 1..n_r, angle j taken mod n_theta
        return 1 + (i - 1) * n_theta + np.mod(j, n_theta)

    j = np.arange(n_theta)
    tris = [np.column_stack([np.zeros(n_theta, dtype=int), idx(1, j), idx(1, j + 1)])]
    for i in range(1, n_r):
        p00, p01 = idx(i, j), idx(i, j + 1)
        p10, p11 = idx(i + 1, j), idx(i + 1, j + 1)
        even = (i + j) % 2 == 0
        t1 = np.where(even[:, None], np.column_stack([p00, p10, p11]), np.column_stack([p00, p10, p01]))
        t2 = np.where(even[:, None], np.column_stack([p00, p11, p01]), np.column_stack([p10, p11, p01]))
        tris.extend([t1, t2])
    triangles = np.vstack(tris).astype(np.int64)

    boundary = idx(n_r, j)
    edges = np.column_stack([boundary, np.roll(boundary, -1)])
    return TriangleMesh(
        nodes=nodes,
        triangles=triangles,
        boundary_nodes=boundary,
        boundary_theta=theta,
        boundary_edges=edges,
        node_rho=node_rho,
        node_theta=node_theta,
        n_r=n_r,
        n_theta=n_theta,
    )


def triangle_angles(m: TriangleMesh) -> np.ndarray:
    """Interior angles (radians), shape ``(n_triangles, 3)``."""
    p = m.nodes[m.triangles]
    out = np.empty(m.triangles.shape)
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
        out[:, k] = np.arctan2(np.abs(cross), np.sum(u * v, axis=1))
    return out


def mesh_quality(m: TriangleMesh, warn_angle_deg: float = 5.0) -> dict:
    """Minimum angle (degrees) and maximum aspect ratio (longest edge / shortest altitude)."""
    ang = np.degrees(triangle_angles(m))
    p = m.nodes[m.triangles]
    lengths = np.stack([np.linalg.norm(p[:, (k + 1) % 3] - p[:, k], axis=1) for k in range(3)], axis=1)
    longest = lengths.max(axis=1)
    altitude = 2 * np.abs(m.triangle_areas()) / longest
    min_angle = float(ang.min())
    return {
        "min_angle_deg": min_angle,
        "max_aspect_ratio": float(np.max(longest / altitude)),
        "warning": min_angle < warn_angle_deg,
    }

"""Projectable convex sets and nonexpansive mappings built from projections.

Each :class:`ConvexSet` variant carries a closed-form metric projection except
:class:`Intersection`, which is projected with Dykstra's alternating scheme.
The projection ``z = P(x)`` of any variant satisfies the variational
characterization ``<x - z, y - z> <= 0`` for all members ``y`` of the set.

Set and mapping objects are immutable after construction and all operations
are pure, so values can be shared freely across threads.
"""

from __future__ import annotations

import numpy as np

from splitep.linalg import as_vector

__all__ = [
    "Averaged",
    "Ball",
    "Box",
    "Composition",
    "ConvexSet",
    "DykstraError",
    "EmptySetError",
    "Halfspace",
    "Identity",
    "Intersection",
    "NonexpansiveMap",
    "ProjectionOnto",
    "WholeSpace",
    "halfspace_dominates",
    "linear_inequality_rows",
    "map_apply",
    "project",
    "project_intersection",
    "project_polyhedron",
]

# Below this norm a halfspace normal is considered exactly zero, encoding the
# whole space (offset >= -TINY_NORMAL) or the empty set (offset < -TINY_NORMAL).
TINY_NORMAL = 1e-14


class EmptySetError(ValueError):
    """A set description denotes the empty set."""


class DykstraError(RuntimeError):
    """Dykstra's scheme stopped without reaching feasibility.

    Either the sweep budget was too small or the intersection is empty.
    """

    def __init__(self, worst_violation: float, sweeps: int):
        self.worst_violation = worst_violation
        self.sweeps = sweeps
        super().__init__(
            f"alternating projections did not converge after {sweeps} sweeps; "
            f"worst membership violation {worst_violation:.3e} "
            "(the intersection may be empty)"
        )


class ConvexSet:
    """Base class for projectable closed convex set descriptions."""

    dim: int

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def membership_violation(self, x) -> float:
        """Euclidean distance from ``x`` to the set (a lower bound for Intersection)."""
        raise NotImplementedError

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.membership_violation(x) <= tol

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Axis-aligned bounds enclosing the set, or None when unbounded."""
        return None


class WholeSpace(ConvexSet):
    """All of R^dim."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(dim)

    def project(self, x) -> np.ndarray:
        return as_vector(x, self.dim)

    def membership_violation(self, x) -> float:
        as_vector(x, self.dim)
        return 0.0

    def __eq__(self, other) -> bool:
        return isinstance(other, WholeSpace) and other.dim == self.dim

    def __repr__(self) -> str:
        return f"WholeSpace(dim={self.dim})"


class Box(ConvexSet):
    """Axis-aligned box ``{x : lower <= x <= upper}`` (componentwise)."""

    def __init__(self, lower, upper):
        self.lower = as_vector(lower)
        self.upper = as_vector(upper, self.lower.size)
        if np.any(self.lower > self.upper):
            raise ValueError("box requires lower <= upper componentwise")
        self.dim = self.lower.size

    def project(self, x) -> np.ndarray:
        return np.clip(as_vector(x, self.dim), self.lower, self.upper)

    def membership_violation(self, x) -> float:
        x = as_vector(x, self.dim)
        return float(np.linalg.norm(x - np.clip(x, self.lower, self.upper)))

    def bounding_box(self):
        return self.lower, self.upper

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Box)
            and bool(np.array_equal(other.lower, self.lower))
            and bool(np.array_equal(other.upper, self.upper))
        )

    def __repr__(self) -> str:
        return f"Box(dim={self.dim})"


class Ball(ConvexSet):
    """Closed Euclidean ball of given center and radius >= 0."""

    def __init__(self, center, radius: float):
        self.center = as_vector(center)
        radius = float(radius)
        if not np.isfinite(radius) or radius < 0.0:
            raise ValueError("ball radius must be finite and >= 0")
        self.radius = radius
        self.dim = self.center.size

    def project(self, x) -> np.ndarray:
        x = as_vector(x, self.dim)
        offset = x - self.center
        dist = np.linalg.norm(offset)
        if dist <= self.radius:
            return x
        return self.center + (self.radius / dist) * offset

    def membership_violation(self, x) -> float:
        x = as_vector(x, self.dim)
        return max(0.0, float(np.linalg.norm(x - self.center)) - self.radius)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Ball)
            and bool(np.array_equal(other.center, self.center))
            and other.radius == self.radius
        )

    def __repr__(self) -> str:
        return f"Ball(dim={self.dim}, radius={self.radius})"


class Halfspace(ConvexSet):
    """Halfspace ``{x : <normal, x> <= offset}``.

    A normal with ``||normal|| < TINY_NORMAL`` encodes the whole space when
    the offset is nonnegative (up to the same tolerance) and is rejected as
    empty otherwise.
    """

    def __init__(self, normal, offset: float):
        self.normal = as_vector(normal)
        self.offset = float(offset)
        if not np.isfinite(self.offset):
            raise ValueError("halfspace offset must be finite")
        self.dim = self.normal.size
        self._normal_sq = float(self.normal @ self.normal)
        self.is_whole_space = np.sqrt(self._normal_sq) < TINY_NORMAL
        if self.is_whole_space and self.offset < -TINY_NORMAL:
            raise EmptySetError("halfspace with zero normal and negative offset is empty")

    def project(self, x) -> np.ndarray:
        x = as_vector(x, self.dim)
        if self.is_whole_space:
            return x
        excess = float(self.normal @ x) - self.offset
        if excess <= 0.0:
            return x
        return x - (excess / self._normal_sq) * self.normal

    def membership_violation(self, x) -> float:
        x = as_vector(x, self.dim)
        if self.is_whole_space:
            return 0.0
        excess = float(self.normal @ x) - self.offset
        return max(0.0, excess / np.sqrt(self._normal_sq))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Halfspace)
            and bool(np.array_equal(other.normal, self.normal))
            and other.offset == self.offset
        )

    def __repr__(self) -> str:
        return f"Halfspace(dim={self.dim})"


class Intersection(ConvexSet):
    """Intersection of finitely many convex sets of one ambient dimension."""

    def __init__(self, members):
        members = list(members)
        if not members:
            raise ValueError("intersection requires at least one member")
        dims = {member.dim for member in members}
        if len(dims) != 1:
            raise ValueError(f"intersection members disagree on dimension: {sorted(dims)}")
        self.members = members
        self.dim = members[0].dim

    def project(self, x) -> np.ndarray:
        return project_intersection(self.members, x)

    def membership_violation(self, x) -> float:
        return max(member.membership_violation(x) for member in self.members)

    def bounding_box(self):
        lo, hi = None, None
        for member in self.members:
            bb = member.bounding_box()
            if bb is None:
                continue
            lo = bb[0] if lo is None else np.maximum(lo, bb[0])
            hi = bb[1] if hi is None else np.minimum(hi, bb[1])
        if lo is None:
            return None
        return lo, hi

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Intersection)
            and len(other.members) == len(self.members)
            and all(a == b for a, b in zip(self.members, other.members))
        )

    def __repr__(self) -> str:
        return f"Intersection(dim={self.dim}, members={len(self.members)})"


def project(convex_set: ConvexSet, x) -> np.ndarray:
    """Metric projection of ``x`` onto ``convex_set``."""
    return convex_set.project(x)


def project_intersection(members, x, tol: float = 1e-10, max_sweeps: int = 10_000) -> np.ndarray:
    """Project ``x`` onto the intersection of ``members`` with Dykstra's scheme.

    Parameters
    ----------
    members : sequence of ConvexSet
        Nonempty list of sets sharing one ambient dimension. The caller is
        responsible for the intersection being nonempty; emptiness surfaces
        as non-convergence.
    x : array_like
        Point to project.
    tol : float
        Stop once no member projection within a full sweep moves the iterate
        by ``tol`` or more in norm. (Comparing only sweep-end iterates is not
        safe: projections are many-to-one, so consecutive sweep ends can
        coincide transiently while the iterate still moves inside the sweep.)
    max_sweeps : int
        Sweep budget.

    Returns
    -------
    numpy.ndarray
        The Dykstra iterate, which converges to the exact projection onto
        the intersection as ``tol -> 0``.

    Raises
    ------
    DykstraError
        If, at exit, the iterate still violates some member's membership by
        more than ``10 * tol`` (exhausted budget or a stalled sweep; either
        way the usual cause is an empty intersection).
    """
    members = list(members)
    if not members:
        raise ValueError("need at least one set to project onto")
    dim = members[0].dim
    x = as_vector(x, dim)
    if len(members) == 1:
        return members[0].project(x)
    # Whole-space members are no-ops for the sweep; dropping them here keeps
    # degenerate cuts (coincident points) from inflating the member list.
    active = [m for m in members if not (isinstance(m, Halfspace) and m.is_whole_space)]
    if not active:
        return x
    increments = [np.zeros(dim) for _ in active]
    current = x
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        moved = 0.0
        for i, member in enumerate(active):
            shifted = current + increments[i]
            projected = member.project(shifted)
            increments[i] = shifted - projected
            moved = max(moved, float(np.linalg.norm(projected - current)))
            current = projected
        if moved < tol:
            break
    worst = max(member.membership_violation(current) for member in active)
    if worst > 10.0 * tol:
        raise DykstraError(worst, sweeps)
    return current


def linear_inequality_rows(convex_set: ConvexSet) -> tuple[np.ndarray, np.ndarray] | None:
    """Describe a polyhedral set as stacked rows ``G r <= h``, else None.

    Whole-space descriptions contribute no rows; balls (and intersections
    containing one) have no finite row description and yield None.
    """
    if isinstance(convex_set, WholeSpace):
        return np.zeros((0, convex_set.dim)), np.zeros(0)
    if isinstance(convex_set, Halfspace):
        if convex_set.is_whole_space:
            return np.zeros((0, convex_set.dim)), np.zeros(0)
        return convex_set.normal[None, :], np.array([convex_set.offset])
    if isinstance(convex_set, Box):
        eye = np.eye(convex_set.dim)
        finite_upper = np.isfinite(convex_set.upper)
        finite_lower = np.isfinite(convex_set.lower)
        G = np.vstack([eye[finite_upper], -eye[finite_lower]])
        h = np.concatenate([convex_set.upper[finite_upper], -convex_set.lower[finite_lower]])
        return G, h
    if isinstance(convex_set, Intersection):
        rows = [linear_inequality_rows(member) for member in convex_set.members]
        if any(r is None for r in rows):
            return None
        return (
            np.vstack([G for G, _ in rows]),
            np.concatenate([h for _, h in rows]),
        )
    return None


def project_polyhedron(
    x0,
    G: np.ndarray,
    h: np.ndarray,
    start_active=(),
    feas_tol: float = 1e-12,
    max_pivots: int | None = None,
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Exact projection of ``x0`` onto ``{r : G r <= h}`` by a dual active-set method.

    Runs the Goldfarb-Idnani iteration for the identity-Hessian quadratic
    program ``min ||r - x0||^2`` subject to the rows: repeatedly pick a
    violated row, then take the longest step that keeps the working-set
    multipliers nonnegative, either activating the row (full primal step) or
    dropping the blocking working row (dual step) and retrying. On success
    the returned point satisfies all rows and the KKT conditions to tolerance,
    i.e. it is the projection to machine precision.

    Returns the projection together with the final active row indices, which
    can seed ``start_active`` on a subsequent call with an enlarged row set
    (existing rows must keep their indices). Unlike Dykstra's scheme this
    is insensitive to nearly parallel rows, but it needs the explicit
    inequality description.

    Raises
    ------
    EmptySetError
        If the rows are detected to be infeasible (no point satisfies all).
    DykstraError
        If the pivot budget is exhausted; callers may fall back to
        :func:`project_intersection`.
    """
    x0 = np.asarray(x0, dtype=float)
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    if G.shape[0] == 0:
        return x0.copy(), ()
    row_scale = np.linalg.norm(G, axis=1)
    if np.any(row_scale == 0.0):
        raise ValueError("zero rows must be filtered out before projection")
    if max_pivots is None:
        max_pivots = 200 + 10 * G.shape[1] + 2 * G.shape[0]
    feas_scale = feas_tol * (1.0 + float(np.linalg.norm(x0)))

    working: list[int] = []
    multipliers: list[float] = []

    def solve_working(rows):
        Gw = G[rows]
        return np.linalg.solve(Gw @ Gw.T, Gw @ x0 - h[rows])

    # Re-derive warm-start multipliers, shedding rows that are no longer
    # binding; rows carried over from a previous call stay independent.
    warm = [i for i in start_active if 0 <= i < G.shape[0]]
    while warm:
        try:
            lam = solve_working(warm)
        except np.linalg.LinAlgError:
            warm = []
            break
        if np.min(lam) >= 0.0:
            working = warm
            multipliers = [float(v) for v in lam]
            break
        del warm[int(np.argmin(lam))]

    r = x0 - G[working].T @ np.asarray(multipliers) if working else x0.copy()

    for _ in range(max_pivots):
        violations = (G @ r - h) / row_scale
        p = int(np.argmax(violations))
        if violations[p] <= feas_scale:
            keep = [i for i, lam in zip(working, multipliers) if lam > 0.0]
            return r, tuple(keep)
        a_p = G[p]
        lam_p = 0.0
        for _ in range(len(working) + 1):
            if working:
                Gw = G[working]
                try:
                    d = np.linalg.solve(Gw @ Gw.T, Gw @ a_p)
                except np.linalg.LinAlgError:
                    d = np.linalg.lstsq(Gw @ Gw.T, Gw @ a_p, rcond=None)[0]
                z = a_p - Gw.T @ d
            else:
                d = np.zeros(0)
                z = a_p.copy()
            z_sq = float(z @ z)
            dependent = z_sq <= (1e-12 * row_scale[p]) ** 2
            # Longest multiplier-feasible dual step along the exchange
            # direction; the blocking row's multiplier hits zero first.
            t_dual = np.inf
            blocking = -1
            for idx, (lam_i, d_i) in enumerate(zip(multipliers, d)):
                if d_i > 1e-14 and max(lam_i, 0.0) / d_i < t_dual:
                    t_dual = max(lam_i, 0.0) / d_i
                    blocking = idx
            if dependent:
                if blocking < 0:
                    raise EmptySetError(
                        "inequality rows are infeasible; no point satisfies them all"
                    )
                t, full_step = t_dual, False
            else:
                t_primal = float(a_p @ r - h[p]) / z_sq
                full_step = t_primal <= t_dual
                t = t_primal if full_step else t_dual
            r = r - t * z
            multipliers = [lam_i - t * d_i for lam_i, d_i in zip(multipliers, d)]
            lam_p += t
            if full_step:
                working.append(p)
                multipliers.append(lam_p)
                break
            del working[blocking]
            del multipliers[blocking]
    raise DykstraError(float(np.max((G @ r - h) / row_scale)), max_pivots)


def halfspace_dominates(a, b) -> Halfspace:
    """Halfspace of points at least as close to ``a`` as to ``b``.

    ``||a - r|| <= ||b - r||`` expands to ``2 <b - a, r> <= ||b||^2 - ||a||^2``.
    The offset is evaluated as ``<b - a, a + b>`` with the same computed
    difference vector as the normal: algebraically identical, but it keeps
    the boundary anchored at the midpoint of ``a`` and ``b`` even when the
    two points nearly coincide, where the naive difference of squared norms
    loses all significant digits. When the points coincide to within the
    zero-normal tolerance the whole space is returned, encoded as a
    zero-normal halfspace with offset 0.
    """
    a = as_vector(a)
    b = as_vector(b, a.size)
    difference = b - a
    normal = 2.0 * difference
    if np.linalg.norm(normal) < TINY_NORMAL:
        return Halfspace(np.zeros(a.size), 0.0)
    offset = float(difference @ (a + b))
    return Halfspace(normal, offset)


class NonexpansiveMap:
    """Base class for nonexpansive self-maps of R^dim."""

    dim: int

    def apply(self, x) -> np.ndarray:
        raise NotImplementedError


class Identity(NonexpansiveMap):
    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(dim)

    def apply(self, x) -> np.ndarray:
        return as_vector(x, self.dim)

    def __eq__(self, other) -> bool:
        return isinstance(other, Identity) and other.dim == self.dim

    def __repr__(self) -> str:
        return f"Identity(dim={self.dim})"


class ProjectionOnto(NonexpansiveMap):
    """Metric projection onto a convex set; its fixed points are the set itself."""

    def __init__(self, target: ConvexSet):
        self.target = target
        self.dim = target.dim

    def apply(self, x) -> np.ndarray:
        return self.target.project(x)

    def __eq__(self, other) -> bool:
        return isinstance(other, ProjectionOnto) and other.target == self.target

    def __repr__(self) -> str:
        return f"ProjectionOnto({self.target!r})"


class Averaged(NonexpansiveMap):
    """Convex combination ``(1 - theta) I + theta base`` with theta in (0, 1]."""

    def __init__(self, theta: float, base: NonexpansiveMap):
        theta = float(theta)
        if not 0.0 < theta <= 1.0:
            raise ValueError("averaging weight must lie in (0, 1]")
        self.theta = theta
        self.base = base
        self.dim = base.dim

    def apply(self, x) -> np.ndarray:
        x = as_vector(x, self.dim)
        return (1.0 - self.theta) * x + self.theta * self.base.apply(x)

    def __eq__(self, other) -> bool:
        return isinstance(other, Averaged) and other.theta == self.theta and other.base == self.base

    def __repr__(self) -> str:
        return f"Averaged(theta={self.theta}, base={self.base!r})"


class Composition(NonexpansiveMap):
    """Composition ``outer(inner(x))`` of two nonexpansive maps."""

    def __init__(self, outer: NonexpansiveMap, inner: NonexpansiveMap):
        if outer.dim != inner.dim:
            raise ValueError("composed maps must share one dimension")
        self.outer = outer
        self.inner = inner
        self.dim = outer.dim

    def apply(self, x) -> np.ndarray:
        return self.outer.apply(self.inner.apply(x))

    def __eq__(self, other) -> bool:
        return isinstance(other, Composition) and other.outer == self.outer and other.inner == self.inner

    def __repr__(self) -> str:
        return f"Composition({self.outer!r}, {self.inner!r})"


def map_apply(mapping: NonexpansiveMap, x) -> np.ndarray:
    """Apply a nonexpansive mapping to a point."""
    return mapping.apply(x)

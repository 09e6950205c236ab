"""Problem instances: construction, planted solutions, and file round-trips.

A :class:`ProblemSpec` bundles the two constraint sets, the coupling
operator, both bifunctions, both nonexpansive mappings and a start point.
:func:`generate_planted` builds seeded instances around a known solution
``x*`` so that convergence can be measured against ground truth, and
:func:`verify_planted` re-checks the planted certificates numerically.

The file format is a single JSON document with top-level keys
``C, Q, A, f, g, S, T, x1, planted_solution``; sets, bifunctions and maps
are tagged by a ``type`` field. Only affine bifunctions are serializable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from splitep.equilibrium import MONOTONE, PSEUDOMONOTONE, AffineVIBifunction, Bifunction
from splitep.linalg import DenseOperator, as_vector, norm
from splitep.sets import (
    Averaged,
    Ball,
    Box,
    Composition,
    ConvexSet,
    EmptySetError,
    Halfspace,
    Identity,
    Intersection,
    NonexpansiveMap,
    ProjectionOnto,
    WholeSpace,
)

__all__ = [
    "ParseError",
    "PlantedReport",
    "ProblemSpec",
    "generate_planted",
    "load",
    "save",
    "verify_planted",
]


class ParseError(ValueError):
    """A problem file is malformed; ``location`` names the offending entry."""

    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}")


@dataclass
class ProblemSpec:
    """One split equilibrium problem instance.

    ``f`` lives on ``C`` (dimension n), ``g`` on ``Q`` (dimension m), and the
    operator ``A`` maps the first space to the second. ``planted_solution``,
    when present, is a point certified to solve the instance.
    """

    C: ConvexSet
    Q: ConvexSet
    A: DenseOperator
    f: Bifunction
    g: Bifunction
    S: NonexpansiveMap
    T: NonexpansiveMap
    x1: np.ndarray
    planted_solution: np.ndarray | None = None

    def __post_init__(self):
        n, m = self.C.dim, self.Q.dim
        if self.A.entries.shape != (m, n):
            raise ValueError(f"operator shape {self.A.entries.shape} does not map dim {n} to dim {m}")
        if self.S.dim != n or self.T.dim != m:
            raise ValueError("nonexpansive mappings must act on their own spaces")
        self.x1 = as_vector(self.x1, n)
        if self.C.membership_violation(self.x1) > 1e-9:
            raise ValueError("start point x1 must belong to the constraint set C")
        if self.planted_solution is not None:
            self.planted_solution = as_vector(self.planted_solution, n)

    @property
    def n(self) -> int:
        return self.C.dim

    @property
    def m(self) -> int:
        return self.Q.dim

    def with_identity_maps(self) -> "ProblemSpec":
        return ProblemSpec(
            C=self.C,
            Q=self.Q,
            A=self.A,
            f=self.f,
            g=self.g,
            S=Identity(self.n),
            T=Identity(self.m),
            x1=self.x1,
            planted_solution=self.planted_solution,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProblemSpec):
            return NotImplemented
        planted_equal = (
            self.planted_solution is None
            and other.planted_solution is None
            or (
                self.planted_solution is not None
                and other.planted_solution is not None
                and bool(np.array_equal(self.planted_solution, other.planted_solution))
            )
        )
        return (
            self.C == other.C
            and self.Q == other.Q
            and self.A == other.A
            and self.f == other.f
            and self.g == other.g
            and self.S == other.S
            and self.T == other.T
            and bool(np.array_equal(self.x1, other.x1))
            and planted_equal
        )


def generate_planted(n: int, m: int, seed: int) -> ProblemSpec:
    """Seeded instance with a known unique solution in the interior of a box.

    Construction: ``x*`` is drawn in the interior of ``C = [-5, 5]^n``; the
    coupling operator has entries in ``[-1, 1]``; ``Q`` is a box of halfwidth
    5 centered at ``A x*``. The first bifunction uses the strongly monotone
    affine operator ``F(x) = M (x - x*)`` with ``M = R^T R + 0.1 I``, which
    makes ``x*`` the unique equilibrium point on ``C``; the second uses
    ``G(u) = N (u - A x*)`` with ``N`` symmetric positive semidefinite, so
    ``A x*`` is an equilibrium point on ``Q``. Both nonexpansive mappings
    average the identity with the projection onto a unit ball centered at the
    respective solution point, whose fixed-point set is that ball. The start
    point is ``x*`` pushed a distance 2 in a random direction and projected
    back onto ``C``.
    """
    if n < 1 or m < 1:
        raise ValueError("dimensions must be >= 1")
    rng = np.random.default_rng(seed)

    x_star = rng.uniform(-4.0, 4.0, size=n)
    C = Box(-5.0 * np.ones(n), 5.0 * np.ones(n))
    A = DenseOperator(rng.uniform(-1.0, 1.0, size=(m, n)))
    image = A.apply(x_star)
    Q = Box(image - 5.0, image + 5.0)

    R = rng.standard_normal((n, n)) / np.sqrt(n)
    M = R.T @ R + 0.1 * np.eye(n)
    f = AffineVIBifunction.with_default_constants(M, -M @ x_star, PSEUDOMONOTONE)

    B = rng.standard_normal((m, m)) / np.sqrt(m)
    N = B.T @ B
    g = AffineVIBifunction.with_default_constants(N, -N @ image, MONOTONE)

    S = Averaged(0.5, ProjectionOnto(Ball(x_star, 1.0)))
    T = Averaged(0.5, ProjectionOnto(Ball(image, 1.0)))

    direction = rng.standard_normal(n)
    direction /= np.linalg.norm(direction)
    x1 = C.project(x_star + 2.0 * direction)

    return ProblemSpec(C=C, Q=Q, A=A, f=f, g=g, S=S, T=T, x1=x1, planted_solution=x_star)


@dataclass
class PlantedReport:
    """Numerical violations of the planted-solution certificates."""

    x1_membership: float
    solution_membership: float
    image_membership: float
    s_fixed_point: float
    t_fixed_point: float
    f_equilibrium: float
    g_equilibrium: float

    def worst(self) -> float:
        return max(
            self.x1_membership,
            self.solution_membership,
            self.image_membership,
            self.s_fixed_point,
            self.t_fixed_point,
            self.f_equilibrium,
            self.g_equilibrium,
        )


def verify_planted(problem: ProblemSpec, samples: int = 100, seed: int = 0) -> PlantedReport:
    """Re-check the planted solution's certificates numerically.

    Memberships and fixed-point equations are checked directly; the
    equilibrium conditions are probed as ``f(x*, v) >= 0`` on sampled
    feasible ``v`` (and likewise for ``g`` at ``A x*``), with samples drawn by
    projecting seeded Gaussian probes onto the respective set.
    """
    if problem.planted_solution is None:
        raise ValueError("verify_planted requires a problem with a planted solution")
    x_star = problem.planted_solution
    image = problem.A.apply(x_star)
    rng = np.random.default_rng(seed)

    f_violation = 0.0
    g_violation = 0.0
    for _ in range(samples):
        v = problem.C.project(3.0 * rng.standard_normal(problem.n))
        f_violation = max(f_violation, -problem.f.evaluate(x_star, v))
        w = problem.Q.project(3.0 * rng.standard_normal(problem.m))
        g_violation = max(g_violation, -problem.g.evaluate(image, w))

    return PlantedReport(
        x1_membership=problem.C.membership_violation(problem.x1),
        solution_membership=problem.C.membership_violation(x_star),
        image_membership=problem.Q.membership_violation(image),
        s_fixed_point=norm(problem.S.apply(x_star) - x_star),
        t_fixed_point=norm(problem.T.apply(image) - image),
        f_equilibrium=max(0.0, f_violation),
        g_equilibrium=max(0.0, g_violation),
    )


# ---------------------------------------------------------------------------
# Serialization


def _vector_to_list(v: np.ndarray) -> list[float]:
    return [float(c) for c in v]


def _set_to_dict(s: ConvexSet) -> dict:
    if isinstance(s, WholeSpace):
        return {"type": "whole", "dim": s.dim}
    if isinstance(s, Box):
        return {"type": "box", "lower": _vector_to_list(s.lower), "upper": _vector_to_list(s.upper)}
    if isinstance(s, Ball):
        return {"type": "ball", "center": _vector_to_list(s.center), "radius": s.radius}
    if isinstance(s, Halfspace):
        return {"type": "halfspace", "normal": _vector_to_list(s.normal), "offset": s.offset}
    if isinstance(s, Intersection):
        return {"type": "intersection", "members": [_set_to_dict(member) for member in s.members]}
    raise ValueError(f"cannot serialize set {s!r}")


def _map_to_dict(mapping: NonexpansiveMap) -> dict:
    if isinstance(mapping, Identity):
        return {"type": "identity", "dim": mapping.dim}
    if isinstance(mapping, ProjectionOnto):
        return {"type": "projection", "set": _set_to_dict(mapping.target)}
    if isinstance(mapping, Averaged):
        return {"type": "averaged", "theta": mapping.theta, "base": _map_to_dict(mapping.base)}
    if isinstance(mapping, Composition):
        return {
            "type": "composition",
            "outer": _map_to_dict(mapping.outer),
            "inner": _map_to_dict(mapping.inner),
        }
    raise ValueError(f"cannot serialize mapping {mapping!r}")


def _bifunction_to_dict(f: Bifunction) -> dict:
    if isinstance(f, AffineVIBifunction):
        return {
            "type": "vi_affine",
            "M": [[float(e) for e in row] for row in f.matrix],
            "q": _vector_to_list(f.offset),
            "c1": f.c1,
            "c2": f.c2,
            "monotonicity": f.monotonicity,
        }
    raise ValueError(
        "only affine bifunctions are serializable; callable bifunctions have no file form"
    )


def _require(entry: dict, key: str, location: str):
    if not isinstance(entry, dict):
        raise ParseError(location, f"expected an object, got {type(entry).__name__}")
    if key not in entry:
        raise ParseError(location, f"missing required key {key!r}")
    return entry[key]


def _parse_vector(data, location: str) -> np.ndarray:
    try:
        return as_vector(data)
    except (ValueError, TypeError) as exc:
        raise ParseError(location, str(exc)) from None


def _parse_set(entry, location: str) -> ConvexSet:
    kind = _require(entry, "type", location)
    try:
        if kind == "whole":
            return WholeSpace(int(_require(entry, "dim", location)))
        if kind == "box":
            return Box(
                _parse_vector(_require(entry, "lower", location), f"{location}.lower"),
                _parse_vector(_require(entry, "upper", location), f"{location}.upper"),
            )
        if kind == "ball":
            return Ball(
                _parse_vector(_require(entry, "center", location), f"{location}.center"),
                float(_require(entry, "radius", location)),
            )
        if kind == "halfspace":
            return Halfspace(
                _parse_vector(_require(entry, "normal", location), f"{location}.normal"),
                float(_require(entry, "offset", location)),
            )
        if kind == "intersection":
            members = _require(entry, "members", location)
            if not isinstance(members, list) or not members:
                raise ParseError(f"{location}.members", "expected a nonempty list")
            return Intersection(
                [_parse_set(member, f"{location}.members[{i}]") for i, member in enumerate(members)]
            )
    except (EmptySetError, ValueError, TypeError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(location, str(exc)) from None
    raise ParseError(location, f"unknown set variant {kind!r}")


def _parse_map(entry, location: str) -> NonexpansiveMap:
    kind = _require(entry, "type", location)
    try:
        if kind == "identity":
            return Identity(int(_require(entry, "dim", location)))
        if kind == "projection":
            return ProjectionOnto(_parse_set(_require(entry, "set", location), f"{location}.set"))
        if kind == "averaged":
            return Averaged(
                float(_require(entry, "theta", location)),
                _parse_map(_require(entry, "base", location), f"{location}.base"),
            )
        if kind == "composition":
            return Composition(
                _parse_map(_require(entry, "outer", location), f"{location}.outer"),
                _parse_map(_require(entry, "inner", location), f"{location}.inner"),
            )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(location, str(exc)) from None
    raise ParseError(location, f"unknown mapping variant {kind!r}")


def _parse_bifunction(entry, location: str) -> Bifunction:
    kind = _require(entry, "type", location)
    if kind != "vi_affine":
        raise ParseError(location, f"unknown bifunction variant {kind!r}")
    try:
        return AffineVIBifunction(
            _require(entry, "M", location),
            _parse_vector(_require(entry, "q", location), f"{location}.q"),
            str(_require(entry, "monotonicity", location)),
            float(_require(entry, "c1", location)),
            float(_require(entry, "c2", location)),
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(location, str(exc)) from None


def problem_to_dict(problem: ProblemSpec) -> dict:
    return {
        "C": _set_to_dict(problem.C),
        "Q": _set_to_dict(problem.Q),
        "A": [[float(e) for e in row] for row in problem.A.entries],
        "f": _bifunction_to_dict(problem.f),
        "g": _bifunction_to_dict(problem.g),
        "S": _map_to_dict(problem.S),
        "T": _map_to_dict(problem.T),
        "x1": _vector_to_list(problem.x1),
        "planted_solution": (
            None if problem.planted_solution is None else _vector_to_list(problem.planted_solution)
        ),
    }


def problem_from_dict(data: dict) -> ProblemSpec:
    if not isinstance(data, dict):
        raise ParseError("$", "expected a JSON object at the top level")
    for key in ("C", "Q", "A", "f", "g", "S", "T", "x1"):
        if key not in data:
            raise ParseError("$", f"missing required key {key!r}")
    try:
        A = DenseOperator(np.asarray(data["A"], dtype=float))
    except (ValueError, TypeError) as exc:
        raise ParseError("A", str(exc)) from None
    planted = data.get("planted_solution")
    try:
        return ProblemSpec(
            C=_parse_set(data["C"], "C"),
            Q=_parse_set(data["Q"], "Q"),
            A=A,
            f=_parse_bifunction(data["f"], "f"),
            g=_parse_bifunction(data["g"], "g"),
            S=_parse_map(data["S"], "S"),
            T=_parse_map(data["T"], "T"),
            x1=_parse_vector(data["x1"], "x1"),
            planted_solution=None if planted is None else _parse_vector(planted, "planted_solution"),
        )
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError("$", str(exc)) from None


def save(problem: ProblemSpec, path) -> None:
    """Write a problem to ``path`` as JSON with full-precision decimals."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(problem_to_dict(problem), handle, indent=2)
        handle.write("\n")


def load(path) -> ProblemSpec:
    """Read a problem from ``path``; malformed files raise :class:`ParseError`."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return problem_from_dict(data)

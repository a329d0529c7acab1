"""Bounded homogeneous maps on the cone: evaluation, combinators, checks.

A map is stored as a raw evaluator on ndarrays together with structure
flags.  Linear maps additionally carry their matrix, which lets several
downstream operations stay exact (operator norms, rank-one perturbations).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .cone import ConeSpace, ConeVector, NormKind, psi_hull
from .errors import DegenerateBoundError, DimensionError, MapContractError


class MapFlag(enum.Flag):
    NONE = 0
    LINEAR = enum.auto()
    SUPERADDITIVE = enum.auto()
    STRICTLY_INCREASING = enum.auto()


@dataclass(frozen=True)
class HomogeneousMap:
    """Evaluatable map of the cone into itself, homogeneous of degree one."""

    space: ConeSpace
    evaluator: object  # Callable[[np.ndarray], np.ndarray]
    flags: MapFlag = MapFlag.NONE
    matrix: np.ndarray | None = None
    name: str = "map"

    def __post_init__(self):
        if self.flags & MapFlag.LINEAR:
            if self.matrix is None:
                raise ValueError("linear maps must carry their matrix")
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (self.space.dim, self.space.dim):
                raise DimensionError(
                    f"matrix shape {m.shape} does not match dimension {self.space.dim}")
            if np.any(m < 0) or not np.all(np.isfinite(m)):
                raise ValueError("linear map matrix must be finite and nonnegative")
            m = m.copy()
            m.flags.writeable = False
            object.__setattr__(self, "matrix", m)
            _check_linear_agreement(self)
        elif self.matrix is not None:
            raise ValueError("matrix is only meaningful with the LINEAR flag")

    def raw(self, x: np.ndarray) -> np.ndarray:
        """Evaluate on a raw array with the cone contract enforced."""
        out = np.asarray(self.evaluator(x), dtype=float)
        if out.shape != x.shape:
            raise MapContractError(
                f"{self.name}: evaluator changed shape {x.shape} -> {out.shape}")
        if not np.all(np.isfinite(out)):
            raise MapContractError(f"{self.name}: evaluator produced NaN/Inf")
        if np.any(out < 0):
            raise MapContractError(f"{self.name}: evaluator left the cone")
        return out

    def __call__(self, x: ConeVector) -> ConeVector:
        return evaluate(self, x)


def _check_linear_agreement(mp: HomogeneousMap, tol: float = 1e-12) -> None:
    # Probe a few vectors; a declared-linear evaluator must match its matrix.
    rng = np.random.default_rng(0)
    n = mp.space.dim
    probes = [np.ones(n)] + [rng.random(n) for _ in range(2)]
    for p in probes:
        got = np.asarray(mp.evaluator(p), dtype=float)
        want = mp.matrix @ p
        scale = max(1.0, float(np.max(np.abs(want))))
        if np.max(np.abs(got - want)) > tol * scale:
            raise MapContractError(f"{mp.name}: evaluator disagrees with matrix")


def from_matrix(matrix, space: ConeSpace | None = None, name: str = "linear") -> HomogeneousMap:
    """Wrap a nonnegative square matrix as a linear homogeneous map."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {m.shape}")
    if space is None:
        space = ConeSpace(m.shape[0])
    return HomogeneousMap(
        space=space,
        evaluator=lambda x, _m=m: _m @ x,
        flags=MapFlag.LINEAR | MapFlag.SUPERADDITIVE,
        matrix=m,
        name=name,
    )


def from_callable(space: ConeSpace, fn, flags: MapFlag = MapFlag.NONE,
                  name: str = "map") -> HomogeneousMap:
    return HomogeneousMap(space=space, evaluator=fn, flags=flags, name=name)


def evaluate(mp: HomogeneousMap, x: ConeVector) -> ConeVector:
    if x.dim != mp.space.dim:
        raise DimensionError(f"vector dim {x.dim} does not match map dim {mp.space.dim}")
    return ConeVector(mp.raw(x.entries))


def power_apply(mp: HomogeneousMap, x: ConeVector, n: int) -> ConeVector:
    """n-fold application; n = 0 is the identity."""
    if n < 0:
        raise ValueError("power must be nonnegative")
    out = x
    for _ in range(n):
        out = evaluate(mp, out)
    return out


def _psi_weight_vector(space: ConeSpace) -> np.ndarray | None:
    """Weight vector w with psi(x) = w . x on the cone, or None for LInf."""
    if space.norm_kind is NormKind.L1:
        return np.ones(space.dim)
    if space.norm_kind is NormKind.WEIGHTED:
        return np.asarray(space.weights, dtype=float)
    return None


def perturb(mp: HomogeneousMap, eps: float, u: ConeVector,
            space: ConeSpace | None = None) -> HomogeneousMap:
    """The map x -> B(x) + eps * psi(x) * u with psi the cone-restricted norm.

    The result dominates eps*psi(x)*u, so it sends nonzero vectors to
    strictly positive multiples of u plus B(x), and it is strictly
    increasing whenever B is order preserving.  For L1-type norms psi is
    additive on the cone, so a linear B stays linear (rank-one update).
    """
    if eps <= 0:
        raise ValueError("perturbation strength eps must be positive")
    sp = space if space is not None else mp.space
    if u.dim != sp.dim:
        raise DimensionError("perturbation direction dimension mismatch")
    if u.is_zero():
        raise DegenerateBoundError("perturbation direction u must be nonzero")

    flags = MapFlag.STRICTLY_INCREASING
    w = _psi_weight_vector(sp)
    if w is not None and (mp.flags & MapFlag.SUPERADDITIVE):
        flags |= MapFlag.SUPERADDITIVE
    if w is not None and (mp.flags & MapFlag.LINEAR):
        matrix = mp.matrix + eps * np.outer(u.entries, w)
        return HomogeneousMap(
            space=sp,
            evaluator=lambda x, _m=matrix: _m @ x,
            flags=flags | MapFlag.LINEAR | MapFlag.SUPERADDITIVE,
            matrix=matrix,
            name=f"{mp.name}+{eps:g}*psi*u",
        )

    ue = u.entries.copy()

    def shifted(x, _mp=mp, _eps=eps, _u=ue, _sp=sp):
        return _mp.raw(np.asarray(x, dtype=float)) + _eps * psi_hull(_sp, x) * _u

    return HomogeneousMap(space=sp, evaluator=shifted, flags=flags,
                          name=f"{mp.name}+{eps:g}*psi*u")


@dataclass(frozen=True)
class OperatorNormEstimate:
    """sup of ||Bx|| over the unit cone ball: exact for linear L1-type norms,
    otherwise a certified lower bound from sampled unit vectors."""

    value: float
    exact: bool
    sample_count: int


def _unit_cone_samples(space: ConeSpace, count: int, rng: np.random.Generator):
    """Entrywise |N(0,1)| draws scaled to the unit sphere of the active norm."""
    out = []
    for _ in range(count):
        v = np.abs(rng.standard_normal(space.dim))
        nv = space.norm(v)
        if nv > 0:
            out.append(v / nv)
    return out


def op_norm_plus(mp: HomogeneousMap, samples: int = 128, seed: int = 0) -> OperatorNormEstimate:
    n = mp.space.dim
    kind = mp.space.norm_kind
    if (mp.flags & MapFlag.LINEAR) and kind in (NormKind.L1, NormKind.WEIGHTED):
        w = _psi_weight_vector(mp.space)
        # Unit-ball extreme points are the scaled basis vectors e_j / w_j.
        col = (w @ mp.matrix) / w
        return OperatorNormEstimate(value=float(np.max(col)), exact=True, sample_count=n)

    if samples < 1:
        raise ValueError("samples must be >= 1 for sampled estimates")
    rng = np.random.default_rng(seed)
    probes = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        probes.append(e / mp.space.norm(e))
    ones = np.ones(n)
    probes.append(ones / mp.space.norm(ones))
    probes.extend(_unit_cone_samples(mp.space, samples, rng))
    best = 0.0
    for p in probes:
        best = max(best, mp.space.norm(mp.raw(p)))
    return OperatorNormEstimate(value=best, exact=False, sample_count=len(probes))


@dataclass
class PropertyReport:
    """Outcome of randomized homogeneity / monotonicity / superadditivity checks."""

    trials: int
    tol: float
    seed: int
    homogeneity_violations: list = field(default_factory=list)
    monotonicity_violations: list = field(default_factory=list)
    superadditivity_violations: list = field(default_factory=list)
    max_homogeneity_defect: float = 0.0
    max_monotonicity_defect: float = 0.0
    max_superadditivity_defect: float = 0.0

    @property
    def ok(self) -> bool:
        return not (self.homogeneity_violations or self.monotonicity_violations
                    or self.superadditivity_violations)

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "tol": self.tol,
            "seed": self.seed,
            "ok": self.ok,
            "violations": {
                "homogeneity": len(self.homogeneity_violations),
                "monotonicity": len(self.monotonicity_violations),
                "superadditivity": len(self.superadditivity_violations),
            },
            "max_defects": {
                "homogeneity": self.max_homogeneity_defect,
                "monotonicity": self.max_monotonicity_defect,
                "superadditivity": self.max_superadditivity_defect,
            },
        }


def verify_properties(mp: HomogeneousMap, trials: int = 200, tol: float = 1e-9,
                      seed: int = 0) -> PropertyReport:
    """Probe B(alpha x) = alpha B(x) and x <= y => B(x) <= B(y) on random pairs.

    Superadditivity B(x+y) >= B(x) + B(y) is checked only when the flag
    claims it.  Violations are collected, never raised.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    rep = PropertyReport(trials=trials, tol=tol, seed=seed)
    n = mp.space.dim
    for t in range(trials):
        x = np.abs(rng.standard_normal(n))
        d = np.abs(rng.standard_normal(n))
        alpha = float(rng.uniform(0.0, 4.0))
        bx = mp.raw(x)
        scale = max(1.0, float(np.max(np.abs(bx))))

        defect = float(np.max(np.abs(mp.raw(alpha * x) - alpha * bx)))
        rel = defect / max(scale * alpha, 1e-300) if alpha > 0 else defect
        rep.max_homogeneity_defect = max(rep.max_homogeneity_defect, rel)
        if rel > tol:
            rep.homogeneity_violations.append({"trial": t, "alpha": alpha, "defect": rel})

        by = mp.raw(x + d)
        slack = float(np.max(bx - by)) / scale
        rep.max_monotonicity_defect = max(rep.max_monotonicity_defect, slack)
        if slack > tol:
            rep.monotonicity_violations.append({"trial": t, "defect": slack})

        if mp.flags & MapFlag.SUPERADDITIVE:
            gap = float(np.max(bx + mp.raw(d) - mp.raw(x + d))) / scale
            rep.max_superadditivity_defect = max(rep.max_superadditivity_defect, gap)
            if gap > tol:
                rep.superadditivity_violations.append({"trial": t, "defect": gap})
    return rep

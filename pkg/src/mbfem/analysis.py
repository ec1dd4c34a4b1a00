"""Error measurement and convergence studies.

Errors are reported in the moving-domain L2 norm, which under the
boundary-fixing change of variables is sqrt(gamma(t)) times the
fixed-domain norm of the difference, and as the maximum nodal error at
the mapped dof positions.  Observed orders come from least-squares fits
in log-log coordinates.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .discretization import FESpace, build_space, gauss_legendre
from .geometry import BoundaryMotion
from .stepper import SchemeState, run

__all__ = [
    "ErrorRecord",
    "ErrorReport",
    "ErrorTracker",
    "RateFit",
    "StudyRow",
    "StudyResult",
    "l2_error_vs_function",
    "measure",
    "fit_slope",
    "convergence_study",
    "format_float",
    "write_study_csv",
    "write_rates_csv",
    "write_errors_csv",
]


@dataclass(frozen=True)
class ErrorRecord:
    """Per-equation errors at one time."""

    time: float
    l2_moving: tuple[float, ...]
    max_nodal: tuple[float, ...]


@dataclass(frozen=True)
class ErrorReport:
    times: list
    l2_moving: list          # one tuple per time
    max_nodal: list
    runtime: float

    @classmethod
    def from_records(cls, records, runtime: float = float("nan")) -> "ErrorReport":
        return cls(
            times=[r.time for r in records],
            l2_moving=[r.l2_moving for r in records],
            max_nodal=[r.max_nodal for r in records],
            runtime=runtime,
        )


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(error) against log(h or delta)."""

    abscissae: tuple[float, ...]
    errors: tuple[float, ...]
    slope: float
    intercept: float
    r_squared: float
    axis: str = ""
    degree: int | None = None
    equation: int | None = None

    @property
    def reliable(self) -> bool:
        """False flags a contaminated fit (plateau from the other error term)."""
        return self.r_squared >= 0.99


@dataclass(frozen=True)
class StudyRow:
    axis: str
    k: int
    nt: int
    h: float
    delta: float
    equation: int
    l2_error: float
    max_nodal_error: float


@dataclass(frozen=True)
class StudyResult:
    rows: list
    fits: list


def l2_error_vs_function(space: FESpace, coeffs, fn, extra: int = 2) -> float:
    """Fixed-domain L2 norm of (expansion - fn) by elevated quadrature.

    The rule uses `extra` more points than assembly, and fn is evaluated
    directly rather than interpolated first, so the measurement does not
    share an error term of the measured order.  fn must accept arrays.
    """
    rule = gauss_legendre(space.quad.n + extra)
    table, _ = space.eval_basis(0, rule.points)  # reference nodes are shared
    c = np.asarray(coeffs, dtype=float)
    acc = 0.0
    for e in range(space.n_elements):
        a, b = space.breakpoints[e], space.breakpoints[e + 1]
        jac = 0.5 * (b - a)
        y_q = a + (rule.points + 1.0) * jac
        diff = table @ c[space.element_dofs(e)] - np.asarray(fn(y_q), dtype=float)
        acc += jac * float(rule.weights @ (diff * diff))
    return math.sqrt(acc)


def measure(state: SchemeState, problem, space: FESpace, motion: BoundaryMotion | None = None) -> ErrorRecord:
    """Errors of a state against the problem's exact solutions."""
    if problem.exact is None:
        raise ValueError("the problem supplies no exact solutions to measure against")
    if motion is None:
        motion = problem.motion
    t = state.time
    root_gamma = math.sqrt(motion.gamma(t))
    x_dofs = motion.to_moving(space.dof_positions, t)
    l2 = []
    mx = []
    for i in range(problem.ne):
        exact = problem.exact[i]
        l2.append(
            root_gamma
            * l2_error_vs_function(space, state.current[i], lambda y: exact(motion.to_moving(y, t), t))
        )
        nodal = np.asarray(exact(x_dofs, t), dtype=float) - state.current[i]
        mx.append(float(np.max(np.abs(nodal))))
    return ErrorRecord(time=t, l2_moving=tuple(l2), max_nodal=tuple(mx))


class ErrorTracker:
    """Run observer that measures errors at selected times.

    With times=None every level is measured (fine for short runs); else a
    level is measured when it is within `tol` of a requested time, each
    request matched once.
    """

    def __init__(self, problem, space: FESpace, times=None, tol: float = 1e-9):
        self.problem = problem
        self.space = space
        self.pending = None if times is None else sorted(times)
        self.tol = tol
        self.records: list[ErrorRecord] = []

    def __call__(self, step_index: int, time: float, vectors) -> None:
        if self.pending is not None:
            hit = [w for w in self.pending if abs(time - w) <= self.tol]
            if not hit:
                return
            for w in hit:
                self.pending.remove(w)
        state = SchemeState(
            t_index=step_index, time=time, delta=0.0, current=tuple(vectors), previous=None
        )
        self.records.append(measure(state, self.problem, self.space))

    def report(self, runtime: float = float("nan")) -> ErrorReport:
        return ErrorReport.from_records(self.records, runtime)


def fit_slope(points, axis: str = "", degree: int | None = None, equation: int | None = None) -> RateFit:
    """Ordinary least squares on (log abscissa, log error)."""
    pts = [(float(a), float(e)) for a, e in points]
    if len(pts) < 3:
        raise ValueError(f"need at least three points to fit a slope, got {len(pts)}")
    if any(a <= 0.0 or e <= 0.0 for a, e in pts):
        raise ValueError("slope fitting needs positive abscissae and errors")
    lx = np.log([a for a, _ in pts])
    ly = np.log([e for _, e in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return RateFit(
        abscissae=tuple(a for a, _ in pts),
        errors=tuple(e for _, e in pts),
        slope=float(slope),
        intercept=float(intercept),
        r_squared=min(max(r2, 0.0), 1.0),
        axis=axis,
        degree=degree,
        equation=equation,
    )


def convergence_study(problem, degrees, mesh_sizes, deltas, q: int | None = None, n_jobs: int = 1) -> StudyResult:
    """Refine along one axis (mesh or time step) and fit observed orders.

    Exactly one of mesh_sizes/deltas may hold more than one value; the
    other parameter is held fixed and must be fine enough that its error
    stays subdominant (an unreliable-fit flag, r^2 < 0.99, marks plateau
    contamination).  Runs that fail are recorded with NaN errors and
    excluded from the fits without aborting the study.  With n_jobs > 1
    runs execute concurrently; aggregation order follows the parameter
    tuples, not completion time.
    """
    mesh_sizes = list(mesh_sizes)
    deltas = list(deltas)
    degrees = list(degrees)
    if len(mesh_sizes) > 1 and len(deltas) > 1:
        raise ValueError("vary either the mesh or the time step in one study, not both")
    axis = "delta" if len(deltas) > 1 else "h"
    params = [(k, nt, d) for k in degrees for nt in mesh_sizes for d in deltas]

    def one(p):
        k, nt, d = p
        try:
            space = build_space(nt, k, q)
            result = run(problem, space, d)
            return measure(result.final, problem, space)
        except Exception as exc:  # noqa: BLE001  (reported per run)
            return exc

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(one, params))
    else:
        outcomes = [one(p) for p in params]

    rows = []
    for (k, nt, d), outcome in zip(params, outcomes):
        if isinstance(outcome, Exception):
            warnings.warn(f"run k={k} nt={nt} delta={d} failed: {outcome}", stacklevel=2)
            errs = (float("nan"),) * problem.ne
            mxs = errs
        else:
            errs = outcome.l2_moving
            mxs = outcome.max_nodal
        for i in range(problem.ne):
            rows.append(
                StudyRow(
                    axis=axis,
                    k=k,
                    nt=nt,
                    h=1.0 / nt,
                    delta=d,
                    equation=i,
                    l2_error=errs[i],
                    max_nodal_error=mxs[i],
                )
            )

    planned_levels = len(mesh_sizes) if axis == "h" else len(deltas)
    fits = []
    for k in degrees:
        for i in range(problem.ne):
            pts = [
                (r.h if axis == "h" else r.delta, r.l2_error)
                for r in rows
                if r.k == k and r.equation == i and math.isfinite(r.l2_error)
            ]
            if len(pts) < 3 and planned_levels >= 3:
                warnings.warn(
                    f"too few successful runs to fit k={k} equation={i}", stacklevel=2
                )
                continue
            fits.append(fit_slope(pts, axis=axis, degree=k, equation=i))
    return StudyResult(rows=rows, fits=fits)


def format_float(x) -> str:
    """17 significant digits: round-trip exact for binary64."""
    return f"{float(x):.17g}"


def write_study_csv(path, rows) -> None:
    with open(path, "w", newline="") as fp:
        wr = csv.writer(fp, lineterminator="\n")
        wr.writerow(["axis", "k", "h", "delta", "equation", "l2_error", "max_nodal_error"])
        for r in rows:
            wr.writerow(
                [
                    r.axis,
                    r.k,
                    format_float(r.h),
                    format_float(r.delta),
                    r.equation,
                    format_float(r.l2_error),
                    format_float(r.max_nodal_error),
                ]
            )


def write_rates_csv(path, fits) -> None:
    with open(path, "w", newline="") as fp:
        wr = csv.writer(fp, lineterminator="\n")
        wr.writerow(["axis", "k", "equation", "slope", "intercept", "r_squared", "reliable"])
        for f in fits:
            wr.writerow(
                [
                    f.axis,
                    f.degree,
                    f.equation,
                    format_float(f.slope),
                    format_float(f.intercept),
                    format_float(f.r_squared),
                    int(f.reliable),
                ]
            )


def write_errors_csv(path, report: ErrorReport) -> None:
    with open(path, "w", newline="") as fp:
        wr = csv.writer(fp, lineterminator="\n")
        wr.writerow(["time", "equation", "l2_error", "max_nodal_error"])
        for t, l2s, mxs in zip(report.times, report.l2_moving, report.max_nodal):
            for i, (l2, mx) in enumerate(zip(l2s, mxs)):
                wr.writerow([format_float(t), i, format_float(l2), format_float(mx)])

"""Fixed-domain discretization.

Meshes of [0, 1], continuous Lagrange elements of arbitrary degree with
equispaced nodes, Gauss-Legendre quadrature, nodal interpolation, and
natural cubic splines for tabulated initial data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "QuadratureRule",
    "FESpace",
    "gauss_legendre",
    "build_space",
    "space_from_breakpoints",
    "interpolate",
    "evaluate_expansion",
    "l2_norm",
    "natural_cubic_spline",
]


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature points in (-1, 1) and positive weights summing to 2."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.points)


def gauss_legendre(q: int) -> QuadratureRule:
    """Gauss-Legendre rule with q points, exact through degree 2q - 1."""
    if q < 1:
        raise ValueError(f"need at least one quadrature point, got q={q}")
    pts, wts = np.polynomial.legendre.leggauss(q)
    return QuadratureRule(points=pts, weights=wts)


def lagrange_table(nodes: np.ndarray, x) -> tuple[np.ndarray, np.ndarray]:
    """Values and first derivatives of the Lagrange cardinal polynomials.

    Returns arrays of shape (len(x), len(nodes)).  Product formula; fine
    for the small degrees used here.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = len(nodes)
    vals = np.ones((x.size, m))
    ders = np.zeros((x.size, m))
    for i in range(m):
        for j in range(m):
            if j == i:
                continue
            vals[:, i] *= (x - nodes[j]) / (nodes[i] - nodes[j])
        for r in range(m):
            if r == i:
                continue
            term = np.full(x.size, 1.0 / (nodes[i] - nodes[r]))
            for j in range(m):
                if j == i or j == r:
                    continue
                term *= (x - nodes[j]) / (nodes[i] - nodes[j])
            ders[:, i] += term
    return vals, ders


@dataclass(frozen=True)
class FESpace:
    """Continuous piecewise-polynomial space on a mesh of [0, 1].

    Degrees of freedom are the k + 1 equispaced Lagrange nodes of each
    element, shared at element interfaces, nt * k + 1 in total.  For
    homogeneous Dirichlet problems the two endpoint dofs are eliminated
    from the solved systems; they stay in the vectors, pinned to zero.

    Immutable after construction; evaluation methods are reentrant.
    """

    breakpoints: np.ndarray       # (nt + 1,) strictly increasing, 0 to 1
    degree: int
    quad: QuadratureRule
    dof_positions: np.ndarray     # (nt * k + 1,)
    shape_values: np.ndarray      # (q, k + 1) at quad points, reference element
    shape_derivs: np.ndarray      # (q, k + 1) d/dxi on the reference element
    element_quad_points: np.ndarray  # (nt, q) quad points mapped into [0, 1]
    jacobians: np.ndarray            # (nt,) half element lengths

    @property
    def n_elements(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def n_dofs(self) -> int:
        return len(self.dof_positions)

    @property
    def quad_points_per_element(self) -> int:
        return self.quad.n

    @property
    def h(self) -> float:
        """Largest element diameter."""
        return float(np.max(np.diff(self.breakpoints)))

    def element_dofs(self, element: int) -> slice:
        """Global dof slice of one element (k + 1 contiguous entries)."""
        k = self.degree
        return slice(element * k, element * k + k + 1)

    def eval_basis(self, element: int, local_point):
        """Shape values and reference derivatives at points in [-1, 1].

        Returns (values, derivatives) with shape (npts, k + 1); values sum
        to 1, derivatives (taken on the reference element) sum to 0.
        """
        if not 0 <= element < self.n_elements:
            raise IndexError(f"element {element} out of range")
        nodes = np.linspace(-1.0, 1.0, self.degree + 1)
        return lagrange_table(nodes, local_point)


def space_from_breakpoints(breakpoints, k: int, q: int | None = None) -> FESpace:
    """Build an FESpace on an arbitrary strictly increasing partition of [0, 1]."""
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or len(bp) < 2:
        raise ValueError("need at least two breakpoints")
    if bp[0] != 0.0 or bp[-1] != 1.0:
        raise ValueError("breakpoints must start at 0 and end at 1")
    if np.any(np.diff(bp) <= 0.0):
        raise ValueError("breakpoints must be strictly increasing")
    if k < 1:
        raise ValueError(f"polynomial degree must be >= 1, got {k}")
    if q is None:
        q = k + 2  # integrates the mass matrix exactly with margin to spare
    if q < k + 1:
        raise ValueError(f"need q >= k + 1 quadrature points, got q={q}")

    rule = gauss_legendre(q)
    nt = len(bp) - 1
    local = np.linspace(0.0, 1.0, k + 1)
    pos = np.empty(nt * k + 1)
    for e in range(nt):
        a, b = bp[e], bp[e + 1]
        pos[e * k : e * k + k + 1] = a + (b - a) * local
    pos[0], pos[-1] = 0.0, 1.0

    ref_nodes = np.linspace(-1.0, 1.0, k + 1)
    sv, sd = lagrange_table(ref_nodes, rule.points)
    jac = 0.5 * np.diff(bp)
    eqp = bp[:-1, None] + (rule.points[None, :] + 1.0) * jac[:, None]
    return FESpace(
        breakpoints=bp,
        degree=k,
        quad=rule,
        dof_positions=pos,
        shape_values=sv,
        shape_derivs=sd,
        element_quad_points=eqp,
        jacobians=jac,
    )


def build_space(nt: int, k: int, q: int | None = None) -> FESpace:
    """Uniform partition of [0, 1] into nt elements of degree k."""
    if nt < 1:
        raise ValueError(f"need at least one element, got nt={nt}")
    return space_from_breakpoints(np.linspace(0.0, 1.0, nt + 1), k, q)


def _sample(fn, pts: np.ndarray) -> np.ndarray:
    """Evaluate fn at pts, vectorized when the callable supports it."""
    try:
        out = np.asarray(fn(pts), dtype=float)
        if out.shape == pts.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(p)) for p in pts])


def interpolate(space: FESpace, u) -> np.ndarray:
    """Nodal interpolant: coefficient j is u at dof position j.

    The endpoint coefficients are forced to zero, matching the
    homogeneous-Dirichlet trial space.
    """
    vals = _sample(u, space.dof_positions)
    if not np.all(np.isfinite(vals)):
        bad = space.dof_positions[~np.isfinite(vals)]
        raise ValueError(f"non-finite sample of the interpolated function at y={bad[0]}")
    vals[0] = 0.0
    vals[-1] = 0.0
    return vals


def evaluate_expansion(space: FESpace, coeffs, y) -> np.ndarray:
    """Evaluate a coefficient vector's expansion at points y in [0, 1]."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (space.n_dofs,):
        raise ValueError(f"expected {space.n_dofs} coefficients, got {c.shape}")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.size and (y.min() < -1e-12 or y.max() > 1.0 + 1e-12):
        raise ValueError(f"evaluation points must lie in [0, 1], got [{y.min()}, {y.max()}]")
    elems = np.clip(
        np.searchsorted(space.breakpoints, y, side="right") - 1,
        0,
        space.n_elements - 1,
    )
    out = np.empty(y.shape)
    for e in np.unique(elems):
        mask = elems == e
        a, b = space.breakpoints[e], space.breakpoints[e + 1]
        xi = 2.0 * (y[mask] - a) / (b - a) - 1.0
        vals, _ = space.eval_basis(e, xi)
        out[mask] = vals @ c[space.element_dofs(e)]
    return out


def l2_norm(space: FESpace, coeffs) -> float:
    """L2 norm over [0, 1] of the expansion, by element-wise quadrature.

    Equals sqrt(c' M c) for the consistent mass matrix, since the rule
    integrates products of shape functions exactly.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (space.n_dofs,):
        raise ValueError(f"expected {space.n_dofs} coefficients, got {c.shape}")
    w = space.quad.weights
    acc = 0.0
    for e in range(space.n_elements):
        vals = space.shape_values @ c[space.element_dofs(e)]
        acc += space.jacobians[e] * float(w @ (vals * vals))
    return float(np.sqrt(acc))


def natural_cubic_spline(knots):
    """C^2 piecewise cubic through the knots, second derivative zero at
    both end knots.

    Parameters
    ----------
    knots : sequence of (position, value)
        At least three, strictly increasing positions.

    Returns
    -------
    callable accepting scalars or arrays.
    """
    pts = np.asarray(knots, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least three (position, value) knots")
    x, v = pts[:, 0], pts[:, 1]
    if np.any(np.diff(x) <= 0.0):
        raise ValueError("knot positions must be strictly increasing")
    return CubicSpline(x, v, bc_type="natural")

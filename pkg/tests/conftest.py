import math

import numpy as np

from mbfem import ProblemSpec, fixed_interval


def heat_problem(T: float = 0.1) -> ProblemSpec:
    """Degenerate cylinder: fixed unit interval, a = 1, f = 0, u0 = sin(pi x).

    Exact solution e^{-pi^2 t} sin(pi x); the constant-coefficient limit in
    which the scheme must reduce to plain Crank-Nicolson Galerkin.
    """
    return ProblemSpec(
        ne=1,
        diffusion=(lambda r: 1.0,),
        forcing=(lambda x, t: np.zeros_like(np.asarray(x, float)),),
        initial=(lambda x: np.sin(np.pi * np.asarray(x, float)),),
        motion=fixed_interval(0.0, 1.0, T=T),
        T=T,
        exact=(lambda x, t: math.exp(-math.pi**2 * t) * np.sin(np.pi * np.asarray(x, float)),),
        diffusion_bounds=((0.5, 2.0),),
        name="cylinder-heat",
    )

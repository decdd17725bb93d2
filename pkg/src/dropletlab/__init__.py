"""dropletlab: numerics for the perimeter-plus-Coulomb liquid drop energy.

Modules
-------
shapes
    Geometric bodies (balls, ellipsoids, spherical-harmonic stars, meshes)
    with measures, ray exits, boundary sampling, and curvature.
energy
    Monte Carlo / quadrature / closed-form estimators for the perimeter,
    Coulomb, and boundary-interaction terms of E = P + D.
potential
    Newtonian potential evaluation: closed forms for balls, graded
    quadrature for radial bodies, and global bounds.
santalo
    Sphere-bundle sampling, chord-moment identities, the main inequality
    pair, chord-Coulomb bounds, and the Jacobian spot check.
variation
    First-variation residuals, the Lagrange multiplier, and mean-convexity
    certificates with the Minkowski deficit.
flow
    Volume-constrained gradient descent over star-shape coefficients.
proofcheck
    Exact-arithmetic verification chains for the scalar inequalities and
    threshold constants.
cli
    The ``dropletlab`` command: reproducible batch runs over everything
    above.
"""

__version__ = "0.1.0"

from .shapes import (  # noqa: F401
    Ball,
    Body,
    BoundarySamples,
    Ellipsoid,
    Measured,
    Mesh,
    StarShape,
    TwoBalls,
    cube_mesh,
    icosphere,
    load_off,
    save_off,
)

from ._backend import available_backends, backend_name, get_backend  # noqa: F401
from .energy import (  # noqa: F401
    ball_profile,
    ball_radius_for_volume,
    coulomb_energy,
    newtonian_potential,
    splitting_threshold,
    total_energy,
)
from .flow import initial_state, run_flow  # noqa: F401
from .proofcheck import (  # noqa: F401
    binding_energy_bounds,
    outer_min_chain,
    roundness_polynomial_chain,
    two_ball_comparison,
)
from .santalo import chord_moment_identity, verify_main_inequalities  # noqa: F401
from .variation import mean_convexity_certificate, stationarity_residual  # noqa: F401

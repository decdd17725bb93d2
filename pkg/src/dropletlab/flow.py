"""Volume-constrained gradient descent on radial harmonic coefficients.

Shapes are radial graphs rho(w) = R (1 + sum c_lm Y_lm(w)).  The descent
direction comes from the constrained shape derivative

    g_lm = int (H + v - lambda) R Y_lm rho^2 dw,
    lambda = (2P + 5D) / (3V),

which is the derivative of E(c) after the exact volume rescaling, since a
radial perturbation delta-rho moves volume at rate rho^2 dw and energy at
rate (H + v) rho^2 dw.  The l = 0 mode (carried by R) and the l = 1 modes
(translations) are frozen; the volume constraint is enforced after every
step by rescaling R, which changes the volume exactly by the cube of the
factor.  All per-step quantities come from deterministic quadrature, so a
run is bit-reproducible; Monte Carlo estimates are for external validation
of endpoints, not for the loop itself.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import harmonics, quadrature
from .potential import potential_quadrature
from .shapes import StarShape

FLOW_GRID = (24, 48)
FLOW_GRID_COARSE = (16, 32)
_FLOW_GRADED = dict(n_phi=16, n_main=16, levels=12)

MAX_HALVINGS = 10
GROW_AFTER = 5
GROW_FACTOR = 1.2
MIN_STEP = 1e-10
FROZEN_MODES = 4  # flat indices 0..3 cover l = 0 and l = 1


def _flow_grid(fine: bool = True):
    return quadrature.gauss_sphere_grid(*(FLOW_GRID if fine else FLOW_GRID_COARSE))


def _graded_grid():
    return quadrature.graded_polar_grid(**_FLOW_GRADED)


@dataclass
class FlowMeasures:
    """Single-grid evaluation of every per-step quantity."""

    volume: float
    perimeter: float
    coulomb: float
    energy: float
    energy_err: float
    lam: float
    rho: np.ndarray
    area_density: np.ndarray
    mean_curvature: np.ndarray
    potential: np.ndarray


def measures(star: StarShape) -> FlowMeasures:
    """Volume, perimeter, Coulomb term, and boundary fields on the flow grid.

    The Coulomb term uses the dilation identity D = (1/5) int v rho^3 dw,
    so the boundary potential pays for both the energy and the gradient.
    The error estimate compares against a coarser grid pass.
    """
    fine = _flow_grid(True)
    vol, per, cou = _energy_on(star, fine)
    vol_c, per_c, cou_c = _energy_on(star, _flow_grid(False))
    energy = per + cou
    energy_err = 4.0 * abs((per + cou) - (per_c + cou_c)) + 1e-12 * abs(energy)
    rho, a, _ = star._surface_density(fine.dirs)
    h = star._curvature_dirs(fine.dirs)
    v = potential_quadrature(star, star.center + rho[:, None] * fine.dirs,
                             grid=_graded_grid())
    return FlowMeasures(
        volume=vol,
        perimeter=per,
        coulomb=cou,
        energy=energy,
        energy_err=energy_err,
        lam=(2.0 * per + 5.0 * cou) / (3.0 * vol),
        rho=rho,
        area_density=a,
        mean_curvature=h,
        potential=v,
    )


def _energy_on(star: StarShape, grid) -> tuple[float, float, float]:
    rho, a, _ = star._surface_density(grid.dirs)
    pts = star.center + rho[:, None] * grid.dirs
    v = potential_quadrature(star, pts, grid=_graded_grid())
    volume = float(grid.integrate(rho**3 / 3.0))
    perimeter = float(grid.integrate(a))
    coulomb = float(grid.integrate(v * rho**3) / 5.0)
    return volume, perimeter, coulomb


@dataclass
class FlowState:
    """One point along the flow, with its shape and step-control state."""

    star: StarShape
    target_volume: float
    step_index: int = 0
    step_size: float = 1e-2
    energy: float = math.nan
    energy_err: float = math.nan
    volume: float = math.nan
    asphericity: float = math.nan
    grad_norm: float = math.nan
    accept_streak: int = 0
    cache: FlowMeasures | None = field(default=None, repr=False, compare=False)

    @property
    def mean_radius(self) -> float:
        return self.star.base_radius

    @property
    def coeffs(self) -> np.ndarray:
        return self.star.coeffs.copy()


def asphericity_of(star: StarShape) -> float:
    """Root sum of squares of the shape coefficients with l >= 2."""
    return float(np.sqrt((star.coeffs[FROZEN_MODES:] ** 2).sum()))


def rescaled_to_volume(star: StarShape, target: float) -> StarShape:
    """Scale the base radius so the quadrature volume matches ``target``."""
    vol = star.volume().value
    s = (target / vol) ** (1.0 / 3.0)
    return StarShape(star.base_radius * s, star.coeff_dict(), star.center,
                     lmax=star.lmax)


def initial_state(volume: float = 1.0,
                  coeffs: dict[tuple[int, int], float] | None = None,
                  lmax: int = 4, step_size: float = 1e-2,
                  base_radius: float | None = None) -> FlowState:
    """Build a volume-matched starting state from coefficient seed values."""
    if base_radius is None:
        base_radius = (3.0 * volume / (4.0 * math.pi)) ** (1.0 / 3.0)
    star = StarShape(base_radius, coeffs, lmax=lmax)
    star = rescaled_to_volume(star, volume)
    state = FlowState(star=star, target_volume=volume, step_size=step_size)
    return _refresh(state)


def _refresh(state: FlowState) -> FlowState:
    m = state.cache if state.cache is not None else measures(state.star)
    state.cache = m
    state.energy = m.energy
    state.energy_err = m.energy_err
    state.volume = m.volume
    state.asphericity = asphericity_of(state.star)
    return state


def energy_gradient(state: FlowState, samples: int | None = None,
                    seed: int = 0) -> np.ndarray:
    """Constrained energy gradient on the harmonic coefficient vector.

    ``samples``/``seed`` are accepted for interface symmetry with the
    stochastic estimators; the evaluation itself is quadrature-based and
    deterministic.  Frozen modes (l <= 1) get zero components.
    """
    del samples, seed
    state = _refresh(state)
    m = state.cache
    grid = _flow_grid(True)
    star = state.star
    residual = m.mean_curvature + m.potential - m.lam
    weight = residual * star.base_radius * m.rho**2
    yvals = _basis_values(star.lmax, grid)
    grad = yvals.T @ (weight * grid.weights)
    grad[:FROZEN_MODES] = 0.0
    return grad


_BASIS_CACHE: dict[tuple, np.ndarray] = {}


def _basis_values(lmax: int, grid) -> np.ndarray:
    key = (lmax, grid.dirs.shape[0])
    if key not in _BASIS_CACHE:
        _BASIS_CACHE[key] = harmonics.basis(lmax).values(grid.dirs)
    return _BASIS_CACHE[key]


def flow_step(state: FlowState, samples: int | None = None,
              seed: int = 0) -> FlowState:
    """One descent attempt with halving on energy increase.

    The candidate c - step * g is rebuilt as a StarShape (which re-checks
    radial positivity), rescaled to the target volume, and accepted only if
    its energy does not exceed the current one beyond combined error bars.
    A halving budget of ``MAX_HALVINGS`` keeps the loop finite; if no step
    is accepted the state is returned with the reduced step size.
    """
    state = _refresh(state)
    grad = energy_gradient(state, samples, seed)
    gnorm = float(np.sqrt((grad**2).sum()))
    step = state.step_size
    for _ in range(MAX_HALVINGS + 1):
        trial = state.star.coeffs - step * grad
        trial[:FROZEN_MODES] = 0.0
        try:
            cand = StarShape(state.star.base_radius,
                             _coeff_mapping(state.star, trial),
                             state.star.center, lmax=state.star.lmax)
            cand = rescaled_to_volume(cand, state.target_volume)
        except ValueError:
            step *= 0.5  # radial degeneracy: barrier, shrink the move
            continue
        m = measures(cand)
        tol = 3.0 * math.hypot(m.energy_err, state.energy_err)
        if m.energy <= state.energy + tol:
            streak = state.accept_streak + 1
            new_step = step * GROW_FACTOR if streak % GROW_AFTER == 0 else step
            new_state = FlowState(
                star=cand,
                target_volume=state.target_volume,
                step_index=state.step_index + 1,
                step_size=new_step,
                accept_streak=streak,
                grad_norm=gnorm,
                cache=m,
            )
            return _refresh(new_state)
        step *= 0.5
    return replace(state, step_size=step, grad_norm=gnorm,
                   accept_streak=0, cache=state.cache)


def _coeff_mapping(star: StarShape, flat: np.ndarray) -> dict:
    return {star.basis.mode_of(k): float(c) for k, c in enumerate(flat) if c != 0.0}


@dataclass
class FlowTrajectory:
    """Recorded descent run: every accepted state plus a status verdict."""

    states: list[FlowState]
    status: str
    tolerance: float

    @property
    def final(self) -> FlowState:
        return self.states[-1]

    CSV_FIELDS = ["step", "energy", "energy_err", "volume", "asphericity",
                  "step_size", "grad_norm"]

    def rows(self) -> list[list]:
        out = []
        for s in self.states:
            out.append([s.step_index, s.energy, s.energy_err, s.volume,
                        s.asphericity, s.step_size, s.grad_norm])
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.CSV_FIELDS)
            writer.writerows(self.rows())

    def save_final_shape(self, path) -> None:
        self.final.star.to_json(path)


def run_flow(state: FlowState, max_steps: int = 500, tolerance: float = 1e-3,
             samples: int | None = None, seed: int = 0) -> FlowTrajectory:
    """Iterate flow_step until the gradient norm drops below tolerance.

    Status is "converged" on meeting the tolerance, "stalled" when the step
    size collapses (no descent possible at quadrature noise), and
    "max steps" otherwise.
    """
    state = _refresh(state)
    states = [state]
    status = "max steps"
    for _ in range(max_steps):
        nxt = flow_step(state, samples, seed)
        accepted = nxt.step_index != state.step_index
        state = nxt
        if accepted:
            states.append(state)
        if not math.isnan(state.grad_norm) and state.grad_norm < tolerance:
            status = "converged"
            break
        if not accepted and state.step_size < MIN_STEP:
            status = "stalled"
            break
    states[-1] = state
    return FlowTrajectory(states=states, status=status, tolerance=tolerance)


def gradient_fd_check(state: FlowState, modes=None, h: float = 1e-3,
                      samples: int | None = None, seed: int = 0) -> list[dict]:
    """Central-difference check of the constrained gradient.

    For each mode, compare g_lm against (E(c + h e) - E(c - h e)) / 2h where
    both displaced shapes are rescaled to the target volume before their
    energies are evaluated.
    """
    state = _refresh(state)
    grad = energy_gradient(state, samples, seed)
    star = state.star
    if modes is None:
        modes = [star.basis.mode_of(k) for k in range(FROZEN_MODES, star.basis.size)]
    out = []
    for (l, mm) in modes:
        k = star.basis.flat_index(l, mm)
        energies = []
        for sign in (+1.0, -1.0):
            flat = star.coeffs.copy()
            flat[k] += sign * h
            shifted = StarShape(star.base_radius, _coeff_mapping(star, flat),
                                star.center, lmax=star.lmax)
            shifted = rescaled_to_volume(shifted, state.target_volume)
            energies.append(measures(shifted).energy)
        fd = (energies[0] - energies[1]) / (2.0 * h)
        # absolute floor keeps symmetry-zero components from dividing by noise
        denom = max(abs(fd), abs(grad[k]), 1e-8 * max(1.0, abs(state.energy)))
        out.append({
            "mode": (l, mm),
            "analytic": float(grad[k]),
            "fd": float(fd),
            "rel_err": abs(grad[k] - fd) / denom,
        })
    return out

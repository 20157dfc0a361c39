"""Scenario definition and TOML file format.

A scenario bundles everything one capture solve needs: orbit context,
chaser initial state, target initial tumble state and inertia, body
geometry, actuation/safety limits, terminal tolerances, docking-corridor
settings, SCP parameters, and the discretization. Defaults follow the
simulation parameter table; every value can be overridden in the file.
"""

from __future__ import annotations

import sys
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from tumblecap import relmotion, target
from tumblecap.collision import CaptureGeometry, ConvexPolytope
from tumblecap.relmotion import ChaserState, OrbitContext
from tumblecap.target import TargetState

DEFAULT_INERTIA = np.array([
    [5.89056, 0.0, 0.0],
    [0.0, 11.4462, 0.233516],
    [0.0, 0.233516, 11.5365],
])

CORRECTED = "corrected"
LITERAL = "literal"


@dataclass(frozen=True)
class Limits:
    u_max: float = 100.0        # N
    v_max: float = 1.5          # m/s
    omega_max: float = 0.2      # rad/s
    r_max: float = 100.0        # m


@dataclass(frozen=True)
class Tolerances:
    eps_p: float = 0.35         # m
    eps_v: float = 0.03         # m/s


@dataclass(frozen=True)
class Docking:
    theta_dock: float = np.deg2rad(30.0)
    n_dock: int = 5


@dataclass(frozen=True)
class ScpParams:
    alpha_min: float = 1.3
    psi: float = 750.0          # collision-slack penalty
    gamma: float = 5.0          # control cost weight in the corrective stage
    i_max: int = 15
    fov_form: str = CORRECTED   # "corrected" | "literal"
    gamma_in_initial: bool = False   # apply gamma already in the initial problem
    solver_tol: float = 1e-9


@dataclass(frozen=True)
class Discretization:
    dt: float = 1.0             # s
    n: int = 150                # state nodes


def default_geometry() -> CaptureGeometry:
    return CaptureGeometry(
        chaser=ConvexPolytope.box([1.0, 1.0, 1.5]),
        target=ConvexPolytope.box([1.0, 1.0, 1.0]),
        d_c=[0.0, 0.0, 2.7],
        d_t=[0.0, 0.0, 2.7],
    )


@dataclass(frozen=True)
class Scenario:
    ctx: OrbitContext
    x0: ChaserState
    target0: TargetState
    J: np.ndarray
    geometry: CaptureGeometry = field(default_factory=default_geometry)
    limits: Limits = Limits()
    tolerances: Tolerances = Tolerances()
    docking: Docking = Docking()
    scp: ScpParams = ScpParams()
    disc: Discretization = Discretization()

    def __post_init__(self):
        object.__setattr__(self, "J", target.validate_inertia(self.J))
        if self.disc.n < 2 or self.disc.dt <= 0.0:
            raise ValueError("discretization requires n >= 2 and dt > 0")
        if self.scp.fov_form not in (CORRECTED, LITERAL):
            raise ValueError(f"unknown fov_form {self.scp.fov_form!r}")
        cap = self.rate_bound()
        rate = float(np.linalg.norm(self.target0.omega))
        if rate > cap + 1e-12:
            warnings.warn(
                f"initial tumble rate {rate:.4f} rad/s exceeds the solvable "
                f"bound {cap:.4f} rad/s; the capture problem is expected to "
                "be infeasible", stacklevel=2)

    def rate_bound(self) -> float:
        """Largest tumble rate the chaser can in principle track at capture."""
        arm = float(np.linalg.norm(self.geometry.d_c) + np.linalg.norm(self.geometry.d_t))
        return min(self.limits.omega_max, self.limits.v_max / arm)

    def with_n(self, n: int) -> "Scenario":
        return replace(self, disc=replace(self.disc, n=n))


def default_scenario(seed: int = 42, n: int | None = None, **overrides) -> Scenario:
    """Table-default scenario with a seeded random tumble and safe orbit."""
    rng = np.random.default_rng(seed)
    ctx = OrbitContext(a=7.738e6, m_c=1500.0)
    target0 = target.sample_random_tumble(rng)
    x0 = relmotion.sample_safe_orbit(rng, (15.0, 25.0), (10.0, 25.0), ctx)
    disc = Discretization(n=n) if n is not None else Discretization()
    return Scenario(ctx=ctx, x0=x0, target0=target0, J=DEFAULT_INERTIA,
                    disc=disc, **overrides)


def _vec(value, length, key):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (length,):
        raise ValueError(f"{key} must have {length} components")
    return arr


def _polytope(table: dict, prefix: str) -> ConvexPolytope:
    if f"{prefix}_box" in table:
        return ConvexPolytope.box(_vec(table[f"{prefix}_box"], 3, f"{prefix}_box"))
    if f"{prefix}_A" in table and f"{prefix}_b" in table:
        return ConvexPolytope(np.asarray(table[f"{prefix}_A"], dtype=float),
                              np.asarray(table[f"{prefix}_b"], dtype=float))
    raise ValueError(f"geometry needs either {prefix}_box or {prefix}_A/{prefix}_b")


def scenario_from_dict(data: dict) -> Scenario:
    """Build a Scenario from parsed TOML data (defaults fill missing keys)."""
    orbit = data.get("orbit", {})
    ctx = OrbitContext(a=float(orbit.get("a", 7.738e6)),
                       m_c=float(orbit.get("m_c", 1500.0)),
                       mu=float(orbit.get("mu", relmotion.MU_EARTH)))

    st = data.get("initial_state", {})
    if "r" not in st or "v" not in st:
        raise ValueError("initial_state requires r and v")
    x0 = ChaserState(_vec(st["r"], 3, "initial_state.r"),
                     _vec(st["v"], 3, "initial_state.v"))

    tgt = data.get("target", {})
    target0 = TargetState(_vec(tgt.get("q0", [1.0, 0, 0, 0]), 4, "target.q0"),
                          _vec(tgt.get("omega0", [0.0, 0, 0]), 3, "target.omega0"))
    J = np.asarray(tgt.get("inertia", DEFAULT_INERTIA), dtype=float)

    geom_tbl = data.get("geometry", {})
    if geom_tbl:
        geometry = CaptureGeometry(
            chaser=_polytope(geom_tbl, "chaser"),
            target=_polytope(geom_tbl, "target"),
            d_c=_vec(geom_tbl.get("d_c", [0.0, 0, 2.7]), 3, "geometry.d_c"),
            d_t=_vec(geom_tbl.get("d_t", [0.0, 0, 2.7]), 3, "geometry.d_t"))
    else:
        geometry = default_geometry()

    lim = data.get("limits", {})
    limits = Limits(u_max=float(lim.get("u_max", 100.0)),
                    v_max=float(lim.get("v_max", 1.5)),
                    omega_max=float(lim.get("omega_max", 0.2)),
                    r_max=float(lim.get("r_max", 100.0)))

    tol = data.get("tolerances", {})
    tolerances = Tolerances(eps_p=float(tol.get("eps_p", 0.35)),
                            eps_v=float(tol.get("eps_v", 0.03)))

    dock = data.get("docking", {})
    theta = (np.deg2rad(float(dock["theta_dock_deg"])) if "theta_dock_deg" in dock
             else float(dock.get("theta_dock", np.deg2rad(30.0))))
    docking = Docking(theta_dock=theta, n_dock=int(dock.get("n_dock", 5)))

    scp_tbl = data.get("scp", {})
    scp = ScpParams(alpha_min=float(scp_tbl.get("alpha_min", 1.3)),
                    psi=float(scp_tbl.get("psi", 750.0)),
                    gamma=float(scp_tbl.get("gamma", 5.0)),
                    i_max=int(scp_tbl.get("i_max", 15)),
                    fov_form=str(scp_tbl.get("fov_form", CORRECTED)),
                    gamma_in_initial=bool(scp_tbl.get("gamma_in_initial", False)),
                    solver_tol=float(scp_tbl.get("solver_tol", 1e-9)))

    disc_tbl = data.get("discretization", {})
    disc = Discretization(dt=float(disc_tbl.get("dt", 1.0)),
                          n=int(disc_tbl.get("n", 150)))

    return Scenario(ctx=ctx, x0=x0, target0=target0, J=J, geometry=geometry,
                    limits=limits, tolerances=tolerances, docking=docking,
                    scp=scp, disc=disc)


def load_scenario(path) -> Scenario:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return scenario_from_dict(data)


def _fmt(value) -> str:
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if isinstance(value, (float, np.floating)):
        return f"{value:.17g}"
    return str(value)


def scenario_to_toml(s: Scenario) -> str:
    """Serialize a scenario to its TOML file form."""
    g = s.geometry
    lines = [
        "[orbit]",
        f"a = {_fmt(s.ctx.a)}",
        f"mu = {_fmt(s.ctx.mu)}",
        f"m_c = {_fmt(s.ctx.m_c)}",
        "",
        "[initial_state]",
        f"r = {_fmt(s.x0.r)}",
        f"v = {_fmt(s.x0.v)}",
        "",
        "[target]",
        f"q0 = {_fmt(s.target0.q)}",
        f"omega0 = {_fmt(s.target0.omega)}",
        f"inertia = {_fmt([list(row) for row in s.J])}",
        "",
        "[geometry]",
        f"chaser_A = {_fmt([list(r) for r in g.chaser.A])}",
        f"chaser_b = {_fmt(g.chaser.b)}",
        f"target_A = {_fmt([list(r) for r in g.target.A])}",
        f"target_b = {_fmt(g.target.b)}",
        f"d_c = {_fmt(g.d_c)}",
        f"d_t = {_fmt(g.d_t)}",
        "",
        "[limits]",
        f"u_max = {_fmt(s.limits.u_max)}",
        f"v_max = {_fmt(s.limits.v_max)}",
        f"omega_max = {_fmt(s.limits.omega_max)}",
        f"r_max = {_fmt(s.limits.r_max)}",
        "",
        "[tolerances]",
        f"eps_p = {_fmt(s.tolerances.eps_p)}",
        f"eps_v = {_fmt(s.tolerances.eps_v)}",
        "",
        "[docking]",
        f"theta_dock = {_fmt(s.docking.theta_dock)}",
        f"n_dock = {s.docking.n_dock}",
        "",
        "[scp]",
        f"alpha_min = {_fmt(s.scp.alpha_min)}",
        f"psi = {_fmt(s.scp.psi)}",
        f"gamma = {_fmt(s.scp.gamma)}",
        f"i_max = {s.scp.i_max}",
        f'fov_form = "{s.scp.fov_form}"',
        f"gamma_in_initial = {'true' if s.scp.gamma_in_initial else 'false'}",
        f"solver_tol = {_fmt(s.scp.solver_tol)}",
        "",
        "[discretization]",
        f"dt = {_fmt(s.disc.dt)}",
        f"n = {s.disc.n}",
        "",
    ]
    return "\n".join(lines)

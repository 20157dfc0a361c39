"""Build-and-solve layer for second-order cone programs.

A ConicProgram is held in a simple standard form:

    minimize    c^T x
    subject to  A_eq x = b_eq
                lb <= x <= ub
                x[I] in K        for each registered cone

where a cone is either a nonnegative orthant over its member variables or
a second-order cone ||tail||_2 <= head. Affine inequalities are modeled by
introducing slack/auxiliary variables tied down with equalities, which
keeps the program canonical: constraint and variable order is exactly
construction order, so solver behavior is reproducible run to run.

The solve step is the single seam to the backend interior-point solver
(Clarabel); nothing above this module sees solver-specific types.
"""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

import clarabel

DEFAULT_TOL = 1e-8

NONNEG = "nonneg"
SOC = "soc"


@dataclass
class Cone:
    kind: str
    indices: np.ndarray   # for SOC the first index is the head


@dataclass
class SolverOutcome:
    status: str              # optimal | infeasible | unbounded | numerical-failure
    x: np.ndarray | None
    objective: float | None
    solve_time: float
    detail: str = ""


class ConicProgram:
    def __init__(self):
        self.n = 0
        self._obj: dict[int, float] = {}
        self._eq_rows: list[tuple[np.ndarray, np.ndarray]] = []   # (indices, coeffs)
        self._eq_rhs: list[float] = []
        self.cones: list[Cone] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._cone_member: set[int] = set()
        self.layout = None   # builder-attached variable map, not serialized

    # -- construction -----------------------------------------------------

    def add_vars(self, count: int, lb: float = -math.inf, ub: float = math.inf) -> np.ndarray:
        start = self.n
        self.n += count
        self._lb.extend([lb] * count)
        self._ub.extend([ub] * count)
        return np.arange(start, start + count)

    def set_bounds(self, index: int, lb: float, ub: float) -> None:
        self._lb[index] = lb
        self._ub[index] = ub

    def add_objective(self, indices, coeffs) -> None:
        for i, c in zip(np.atleast_1d(indices), np.atleast_1d(coeffs)):
            if not math.isfinite(c):
                raise ValueError("objective coefficient must be finite")
            self._obj[int(i)] = self._obj.get(int(i), 0.0) + float(c)

    def add_eq(self, indices, coeffs, rhs: float) -> None:
        idx = np.atleast_1d(np.asarray(indices, dtype=int))
        cof = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if idx.shape != cof.shape:
            raise ValueError("index/coefficient shape mismatch")
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise ValueError("equality references unknown variable")
        if not (np.all(np.isfinite(cof)) and math.isfinite(rhs)):
            raise ValueError("equality coefficients must be finite")
        self._eq_rows.append((idx, cof))
        self._eq_rhs.append(float(rhs))

    def _claim(self, indices) -> None:
        for i in indices:
            i = int(i)
            if i < 0 or i >= self.n:
                raise ValueError(f"cone references unknown variable {i}")
            if i in self._cone_member:
                raise ValueError(f"variable {i} already belongs to a cone")
            self._cone_member.add(i)

    def add_nonneg(self, indices) -> int:
        idx = np.atleast_1d(np.asarray(indices, dtype=int))
        self._claim(idx)
        self.cones.append(Cone(NONNEG, idx))
        return len(self.cones) - 1

    def add_soc(self, head: int, tail) -> int:
        """Register ||x[tail]||_2 <= x[head]. An empty tail means x[head] >= 0."""
        idx = np.concatenate([[int(head)], np.asarray(tail, dtype=int).ravel()])
        self._claim(idx)
        self.cones.append(Cone(SOC, idx))
        return len(self.cones) - 1

    # -- properties --------------------------------------------------------

    @property
    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.n)
        for i, v in self._obj.items():
            c[i] = v
        return c

    @property
    def n_eq(self) -> int:
        return len(self._eq_rhs)

    def equalities(self) -> tuple[sparse.csr_matrix, np.ndarray]:
        rows, cols, vals = [], [], []
        for r, (idx, cof) in enumerate(self._eq_rows):
            rows.extend([r] * len(idx))
            cols.extend(idx.tolist())
            vals.extend(cof.tolist())
        A = sparse.csr_matrix((vals, (rows, cols)), shape=(self.n_eq, self.n))
        return A, np.asarray(self._eq_rhs)

    # -- debug dump format -------------------------------------------------

    def dump(self) -> str:
        """Line-oriented text form; stable and re-parseable for repro bundles."""
        out = io.StringIO()
        out.write(f"socp 1\nnvars {self.n}\n")
        for i in sorted(self._obj):
            out.write(f"obj {i} {self._obj[i]:.17g}\n")
        for i in range(self.n):
            if self._lb[i] != -math.inf or self._ub[i] != math.inf:
                out.write(f"bound {i} {self._lb[i]:.17g} {self._ub[i]:.17g}\n")
        for (idx, cof), rhs in zip(self._eq_rows, self._eq_rhs):
            terms = " ".join(f"{i}:{c:.17g}" for i, c in zip(idx, cof))
            out.write(f"eq {rhs:.17g} {terms}\n")
        for cone in self.cones:
            out.write(f"cone {cone.kind} {' '.join(str(i) for i in cone.indices)}\n")
        out.write("end\n")
        return out.getvalue()

    @staticmethod
    def parse(text: str) -> "ConicProgram":
        prog = ConicProgram()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                if parts[0] == "socp":
                    continue
                elif parts[0] == "nvars":
                    prog.add_vars(int(parts[1]))
                elif parts[0] == "obj":
                    prog.add_objective(int(parts[1]), float(parts[2]))
                elif parts[0] == "bound":
                    prog.set_bounds(int(parts[1]), float(parts[2]), float(parts[3]))
                elif parts[0] == "eq":
                    rhs = float(parts[1])
                    idx = [int(t.split(":")[0]) for t in parts[2:]]
                    cof = [float(t.split(":")[1]) for t in parts[2:]]
                    prog.add_eq(idx, cof, rhs)
                elif parts[0] == "cone":
                    if parts[1] == NONNEG:
                        prog.add_nonneg([int(i) for i in parts[2:]])
                    elif parts[1] == SOC:
                        prog.add_soc(int(parts[2]), [int(i) for i in parts[3:]])
                    else:
                        raise ValueError(f"unknown cone kind {parts[1]!r}")
                elif parts[0] == "end":
                    break
                else:
                    raise ValueError(f"unknown directive {parts[0]!r}")
            except (IndexError, ValueError) as exc:
                raise ValueError(f"dump parse error at line {lineno}: {exc}") from exc
        return prog


def l1_epigraph(prog: ConicProgram, u_indices_per_step: list[np.ndarray]) -> np.ndarray:
    """Add t >= |u| epigraph variables and their objective contribution.

    For every control component two nonnegative slacks enforce
    t - u >= 0 and t + u >= 0; the sum of all t enters the objective.
    Returns the t indices, timestep-major.
    """
    t_all = []
    for u_idx in u_indices_per_step:
        u_idx = np.asarray(u_idx, dtype=int)
        m = len(u_idx)
        t = prog.add_vars(m)
        s_minus = prog.add_vars(m)
        s_plus = prog.add_vars(m)
        for j in range(m):
            prog.add_eq([t[j], u_idx[j], s_minus[j]], [1.0, -1.0, -1.0], 0.0)
            prog.add_eq([t[j], u_idx[j], s_plus[j]], [1.0, 1.0, -1.0], 0.0)
        prog.add_nonneg(s_minus)
        prog.add_nonneg(s_plus)
        prog.add_objective(t, np.ones(m))
        t_all.append(t)
    return np.concatenate(t_all) if t_all else np.empty(0, dtype=int)


def _lower(prog: ConicProgram):
    """Lower the program to Clarabel's A x + s = b, s in K form."""
    A_eq, b_eq = prog.equalities()
    blocks = [A_eq]
    b = [b_eq]
    cones = [clarabel.ZeroConeT(prog.n_eq)] if prog.n_eq else []

    # bounds and nonneg cones share one nonnegative block
    rows, cols, vals, rhs = [], [], [], []

    def add_row(col, coeff, bval):
        rows.append(len(rhs))
        cols.append(col)
        vals.append(coeff)
        rhs.append(bval)

    for i in range(prog.n):
        if prog._lb[i] != -math.inf:
            add_row(i, -1.0, -prog._lb[i])     # x - lb >= 0
        if prog._ub[i] != math.inf:
            add_row(i, 1.0, prog._ub[i])       # ub - x >= 0
    soc_dims = []
    soc_rows, soc_cols, soc_vals = [], [], []
    n_soc_rows = 0
    for cone in prog.cones:
        if cone.kind == NONNEG:
            for i in cone.indices:
                add_row(int(i), -1.0, 0.0)
        elif len(cone.indices) == 1:
            add_row(int(cone.indices[0]), -1.0, 0.0)   # 1-d SOC is x >= 0
        else:
            for i in cone.indices:
                soc_rows.append(n_soc_rows)
                soc_cols.append(int(i))
                soc_vals.append(-1.0)
                n_soc_rows += 1
            soc_dims.append(len(cone.indices))

    if rhs:
        blocks.append(sparse.csr_matrix((vals, (rows, cols)), shape=(len(rhs), prog.n)))
        b.append(np.asarray(rhs))
        cones.append(clarabel.NonnegativeConeT(len(rhs)))
    if soc_dims:
        blocks.append(sparse.csr_matrix((soc_vals, (soc_rows, soc_cols)),
                                        shape=(n_soc_rows, prog.n)))
        b.append(np.zeros(n_soc_rows))
        cones.extend(clarabel.SecondOrderConeT(d) for d in soc_dims)

    A = sparse.vstack(blocks).tocsc()
    return A, np.concatenate(b), cones


_STATUS_MAP = {
    "Solved": "optimal",
    "AlmostSolved": "optimal",
    "PrimalInfeasible": "infeasible",
    "AlmostPrimalInfeasible": "infeasible",
    "DualInfeasible": "unbounded",
    "AlmostDualInfeasible": "unbounded",
}


def solve(prog: ConicProgram, tol: float = DEFAULT_TOL) -> SolverOutcome:
    """Solve with the backend interior-point solver."""
    t0 = time.perf_counter()
    try:
        A, b, cones = _lower(prog)
        P = sparse.csc_matrix((prog.n, prog.n))
        settings = clarabel.DefaultSettings()
        settings.verbose = False
        settings.tol_feas = tol
        settings.tol_gap_abs = tol
        settings.tol_gap_rel = tol
        solver = clarabel.DefaultSolver(P, prog.objective_vector, A, b, cones, settings)
        sol = solver.solve()
    except Exception as exc:  # backend crash
        return SolverOutcome(status="numerical-failure", x=None, objective=None,
                             solve_time=time.perf_counter() - t0, detail=str(exc))
    status = _STATUS_MAP.get(str(sol.status), "numerical-failure")
    if status == "optimal":
        return SolverOutcome(status="optimal", x=np.asarray(sol.x),
                             objective=float(sol.obj_val),
                             solve_time=sol.solve_time, detail=str(sol.status))
    return SolverOutcome(status=status, x=None, objective=None,
                         solve_time=sol.solve_time, detail=str(sol.status))

"""Dense linear-programming kernel with builder API and MPS interchange.

The reference kernel is a two-phase primal simplex with Bland's anti-cycling
rule, always on. It is deliberately small and verifiable: every dispatch
formulation is tested against it at oracle scale. Large scenario programs
(tens of thousands of rows) exceed what a dense tableau can do, so ``solve``
also offers scipy's HiGHS backend behind the same contract; ``method="auto"``
picks the kernel for desk-scale problems and HiGHS beyond.

MPS export writes fixed-column layout with generated 8-character row/column
ids; original labels ride along in comment lines so the bundled parser
round-trips the program exactly. Numeric fields use full %.17g precision and
may extend past the nominal fixed-field width (whitespace-delimited, accepted
by all modern readers).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from .errors import ConfigurationError, DomainError, NumericalError, ResourceError

FEAS_TOL = 1e-9
COST_TOL = 1e-7
DEFAULT_MAX_ITERS = 50_000
_AUTO_DENSE_LIMIT = 250_000  # builder dense-matrix cells
_AUTO_KERNEL_CELLS = 20_000  # route to the dense kernel below this size


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """min c@x s.t. A_eq x = b_eq, A_ub x <= b_ub, lo <= x <= hi."""

    objective: np.ndarray
    a_eq: object  # ndarray or scipy.sparse
    b_eq: np.ndarray
    a_ub: object
    b_ub: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    labels: list[str]
    eq_labels: list[str] = field(default_factory=list)
    ub_labels: list[str] = field(default_factory=list)
    objective_constant: float = 0.0
    name: str = "LP"

    def __post_init__(self):
        n = len(self.objective)
        if len(self.labels) != n or len(set(self.labels)) != n:
            raise ConfigurationError("variable labels must be unique, one per var")
        if np.any(~np.isfinite(self.objective)):
            raise ConfigurationError("non-finite objective coefficients")
        if np.any(self.lower > self.upper):
            raise ConfigurationError("lower bound above upper bound")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.b_eq) + len(self.b_ub)

    def eq_dense(self) -> np.ndarray:
        return self.a_eq.toarray() if sp.issparse(self.a_eq) else np.asarray(self.a_eq)

    def ub_dense(self) -> np.ndarray:
        return self.a_ub.toarray() if sp.issparse(self.a_ub) else np.asarray(self.a_ub)


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    objective_value: float | None
    dual_gap: float | None = None
    iterations: int = 0
    infeasible_rows: list[str] = field(default_factory=list)
    method: str = ""

    def value(self, lp: LinearProgram, label: str) -> float:
        return float(self.x[lp.labels.index(label)])


class LpBuilder:
    """Incremental LP assembly keyed by variable labels."""

    def __init__(self, name: str = "LP"):
        self.name = name
        self._cost: list[float] = []
        self._lo: list[float] = []
        self._hi: list[float] = []
        self._labels: list[str] = []
        self._index: dict[str, int] = {}
        self._eq_rows: list[tuple[dict[int, float], float, str]] = []
        self._ub_rows: list[tuple[dict[int, float], float, str]] = []
        self.objective_constant = 0.0

    def add_var(self, label: str, lo=0.0, hi=np.inf, cost=0.0) -> int:
        if label in self._index:
            raise ConfigurationError(f"duplicate variable label {label!r}")
        idx = len(self._labels)
        self._index[label] = idx
        self._labels.append(label)
        self._cost.append(float(cost))
        self._lo.append(float(lo))
        self._hi.append(float(hi))
        return idx

    def __getitem__(self, label: str) -> int:
        return self._index[label]

    def add_eq(self, coeffs: dict[int, float], rhs: float, label: str = "") -> None:
        self._eq_rows.append((dict(coeffs), float(rhs), label or f"eq{len(self._eq_rows)}"))

    def add_ub(self, coeffs: dict[int, float], rhs: float, label: str = "") -> None:
        self._ub_rows.append((dict(coeffs), float(rhs), label or f"ub{len(self._ub_rows)}"))

    def add_lb(self, coeffs: dict[int, float], rhs: float, label: str = "") -> None:
        """coeffs @ x >= rhs, stored as the negated <= row."""
        self.add_ub({j: -v for j, v in coeffs.items()}, -rhs, label)

    def _assemble(self, rows, n, force_sparse):
        mat_rows = len(rows)
        use_sparse = force_sparse or (mat_rows * n > _AUTO_DENSE_LIMIT)
        rhs = np.array([r[1] for r in rows])
        labels = [r[2] for r in rows]
        if use_sparse:
            data, ri, ci = [], [], []
            for i, (coeffs, _, _) in enumerate(rows):
                for j, v in coeffs.items():
                    if v != 0.0:
                        data.append(v)
                        ri.append(i)
                        ci.append(j)
            mat = sp.csr_matrix((data, (ri, ci)), shape=(mat_rows, n))
        else:
            mat = np.zeros((mat_rows, n))
            for i, (coeffs, _, _) in enumerate(rows):
                for j, v in coeffs.items():
                    mat[i, j] = v
        return mat, rhs, labels

    def build(self, sparse: bool | None = None) -> LinearProgram:
        n = len(self._labels)
        force = bool(sparse)
        a_eq, b_eq, eq_labels = self._assemble(self._eq_rows, n, force)
        a_ub, b_ub, ub_labels = self._assemble(self._ub_rows, n, force)
        return LinearProgram(
            objective=np.array(self._cost),
            a_eq=a_eq,
            b_eq=b_eq,
            a_ub=a_ub,
            b_ub=b_ub,
            lower=np.array(self._lo),
            upper=np.array(self._hi),
            labels=list(self._labels),
            eq_labels=eq_labels,
            ub_labels=ub_labels,
            objective_constant=self.objective_constant,
            name=self.name,
        )


# ---------------------------------------------------------------------------
# Reference kernel: two-phase primal simplex, Bland's rule.
# ---------------------------------------------------------------------------


def _to_standard_form(lp: LinearProgram):
    """Rewrite as min c'@x', A x' = b, x' >= 0.

    Returns (c, A, b, const, recover, row_labels) where ``recover`` maps a
    standard-form point back to original variables.
    """
    n = lp.n_vars
    a_eq, a_ub = lp.eq_dense(), lp.ub_dense()
    cols: list[np.ndarray] = []  # original-variable expansion columns
    c: list[float] = []
    shift = np.zeros(n)  # x = shift + M @ x'
    mapping: list[tuple[int, float]] = []  # (orig var, sign) per std var
    extra_ub: list[tuple[int, float]] = []  # (std var, cap) rows for boxes
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isfinite(lo):
            shift[j] = lo
            mapping.append((j, 1.0))
            c.append(lp.objective[j])
            if np.isfinite(hi):
                extra_ub.append((len(mapping) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[j] = hi
            mapping.append((j, -1.0))
            c.append(-lp.objective[j])
        else:
            mapping.append((j, 1.0))
            c.append(lp.objective[j])
            mapping.append((j, -1.0))
            c.append(-lp.objective[j])
    n_std = len(mapping)
    expand = np.zeros((n, n_std))
    for k, (j, sign) in enumerate(mapping):
        expand[j, k] = sign

    const = float(lp.objective @ shift) + lp.objective_constant

    rows: list[np.ndarray] = []
    rhs: list[float] = []
    kinds: list[str] = []  # 'eq' or 'ub'
    row_labels: list[str] = []
    for i in range(len(lp.b_eq)):
        rows.append(a_eq[i] @ expand)
        rhs.append(lp.b_eq[i] - float(a_eq[i] @ shift))
        kinds.append("eq")
        row_labels.append(lp.eq_labels[i] if lp.eq_labels else f"eq{i}")
    for i in range(len(lp.b_ub)):
        rows.append(a_ub[i] @ expand)
        rhs.append(lp.b_ub[i] - float(a_ub[i] @ shift))
        kinds.append("ub")
        row_labels.append(lp.ub_labels[i] if lp.ub_labels else f"ub{i}")
    for k, cap in extra_ub:
        row = np.zeros(n_std)
        row[k] = 1.0
        rows.append(row)
        rhs.append(cap)
        kinds.append("ub")
        row_labels.append(f"_box_{lp.labels[mapping[k][0]]}")

    m = len(rows)
    a = np.vstack(rows) if m else np.zeros((0, n_std))
    b = np.array(rhs)

    # Slacks for <= rows.
    n_slack = sum(1 for k in kinds if k == "ub")
    slack_of_row = {}
    a_full = np.hstack([a, np.zeros((m, n_slack))])
    si = 0
    for i, k in enumerate(kinds):
        if k == "ub":
            a_full[i, n_std + si] = 1.0
            slack_of_row[i] = n_std + si
            si += 1
    c_full = np.concatenate([c, np.zeros(n_slack)])

    # Make RHS nonnegative.
    flipped = b < 0
    a_full[flipped] *= -1.0
    b = np.abs(b)

    def recover(x_std: np.ndarray) -> np.ndarray:
        return shift + expand @ x_std[:n_std]

    basic_candidates = {
        i: slack_of_row[i]
        for i in range(m)
        if i in slack_of_row and not flipped[i]
    }
    return c_full, a_full, b, const, recover, row_labels, basic_candidates


def _bland_simplex(tab, basis, cost_row, max_iters, tol=FEAS_TOL):
    """In-place primal simplex on [A | b] with explicit cost row.

    cost_row holds reduced costs (length n+1, last entry = -objective).
    Bland's rule throughout: entering = lowest index with negative reduced
    cost, leaving = exact minimum ratio with ties broken by lowest basis
    index. Returns (status, iterations).
    """
    m, ncol = tab.shape
    n = ncol - 1
    cost_tol = COST_TOL * max(1.0, float(np.max(np.abs(cost_row[:-1]), initial=0.0)))
    for it in range(max_iters):
        neg = np.nonzero(cost_row[:-1] < -cost_tol)[0]
        if len(neg) == 0:
            return "optimal", it
        enter = int(neg[0])
        col = tab[:, enter]
        rows = np.nonzero(col > tol)[0]
        if len(rows) == 0:
            return "unbounded", it
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12]
        leave = int(tied[np.argmin(basis[tied])])
        piv = tab[leave, enter]
        tab[leave] /= piv
        fac = tab[:, enter].copy()
        fac[leave] = 0.0
        tab -= np.outer(fac, tab[leave])
        cost_row -= cost_row[enter] * tab[leave]
        # Sweep away pivot round-off in the RHS.
        rhs = tab[:, -1]
        rhs[(rhs < 0) & (rhs > -1e-11)] = 0.0
        basis[leave] = enter
    raise ResourceError(f"simplex exceeded the iteration cap of {max_iters}")


def _solve_simplex(lp: LinearProgram, max_iters: int, feas_tol: float) -> LpSolution:
    c, a, b, const, recover, row_labels, basics = _to_standard_form(lp)
    m, n = a.shape
    iters = 0

    # Phase 1 basis: natural slacks where available, artificials elsewhere.
    art_rows = [i for i in range(m) if i not in basics]
    n_art = len(art_rows)
    tab = np.hstack([a, np.zeros((m, n_art)), b[:, None]])
    basis = np.empty(m, dtype=int)
    for i, j in basics.items():
        basis[i] = j
    for k, i in enumerate(art_rows):
        tab[i, n + k] = 1.0
        basis[i] = n + k

    if n_art:
        cost1 = np.zeros(n + n_art + 1)
        cost1[n : n + n_art] = 1.0
        for i in art_rows:  # price out the artificial basis
            cost1 -= tab[i]
        status, it1 = _bland_simplex(tab, basis, cost1, max_iters, feas_tol)
        iters += it1
        phase1_obj = -cost1[-1]
        if status != "optimal" and phase1_obj > 1e-7:
            # The phase-1 objective is bounded below by zero, so a ratio-test
            # dead end here is numerical, not structural.
            raise NumericalError("phase-1 simplex failed to terminate")
        if phase1_obj > 1e-7:
            bad = sorted(
                row_labels[i]
                for i in range(m)
                if basis[i] >= n and tab[i, -1] > 1e-7
            )
            return LpSolution(
                status=LpStatus.INFEASIBLE,
                x=None,
                objective_value=None,
                iterations=iters,
                infeasible_rows=bad,
                method="bland",
            )
        # Pivot any residual artificial out of the basis (degenerate rows).
        for i in range(m):
            if basis[i] >= n:
                for j in range(n):
                    if abs(tab[i, j]) > feas_tol:
                        piv = tab[i, j]
                        tab[i] /= piv
                        fac = tab[:, j].copy()
                        fac[i] = 0.0
                        tab -= np.outer(fac, tab[i])
                        basis[i] = j
                        break
        keep_rows = [i for i in range(m) if basis[i] < n]
        tab = tab[keep_rows][:, list(range(n)) + [n + n_art]]
        basis = basis[keep_rows]
        row_keep = keep_rows
    else:
        tab = np.hstack([a, b[:, None]])
        row_keep = list(range(m))

    # Phase 2.
    cost2 = np.concatenate([c, [0.0]]).astype(float)
    for i in range(len(basis)):
        if cost2[basis[i]] != 0.0:
            cost2 -= cost2[basis[i]] * tab[i]
    status, it2 = _bland_simplex(tab, basis, cost2, max_iters, feas_tol)
    iters += it2
    if status == "unbounded":
        return LpSolution(
            status=LpStatus.UNBOUNDED,
            x=None,
            objective_value=None,
            iterations=iters,
            method="bland",
        )

    x_std = np.zeros(tab.shape[1] - 1)
    x_std[basis] = tab[:, -1]
    x = recover(x_std)
    obj = float(c @ x_std) + const

    # Duality gap from the final basis: solve B^T y = c_B on the original
    # standard-form system, dual objective = y @ b.
    a_kept = a[row_keep]
    b_kept = b[row_keep]
    basis_mat = a_kept[:, basis]
    try:
        y = np.linalg.solve(basis_mat.T, c[basis])
        gap = abs(float(c @ x_std) - float(y @ b_kept))
    except np.linalg.LinAlgError:  # pragma: no cover - defensive
        gap = None
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        objective_value=obj,
        dual_gap=gap,
        iterations=iters,
        method="bland",
    )


# ---------------------------------------------------------------------------
# HiGHS backend (scipy.optimize.linprog) behind the same contract.
# ---------------------------------------------------------------------------


def _solve_highs(lp: LinearProgram) -> LpSolution:
    res = scipy.optimize.linprog(
        c=lp.objective,
        A_ub=lp.a_ub if len(lp.b_ub) else None,
        b_ub=lp.b_ub if len(lp.b_ub) else None,
        A_eq=lp.a_eq if len(lp.b_eq) else None,
        b_eq=lp.b_eq if len(lp.b_eq) else None,
        bounds=list(zip(lp.lower, lp.upper)),
        method="highs",
    )
    if res.status == 2:
        return LpSolution(
            status=LpStatus.INFEASIBLE, x=None, objective_value=None, method="highs"
        )
    if res.status == 3:
        return LpSolution(
            status=LpStatus.UNBOUNDED, x=None, objective_value=None, method="highs"
        )
    if res.status != 0:
        raise NumericalError(f"HiGHS failed: {res.message}")
    gap = None
    if res.get("eqlin") is not None:
        dual = 0.0
        if len(lp.b_eq):
            dual += float(np.asarray(res.eqlin.marginals) @ lp.b_eq)
        if len(lp.b_ub):
            dual += float(np.asarray(res.ineqlin.marginals) @ lp.b_ub)
        lo_m = np.asarray(res.lower.marginals)
        up_m = np.asarray(res.upper.marginals)
        finite_lo = np.isfinite(lp.lower)
        finite_hi = np.isfinite(lp.upper)
        dual += float(lo_m[finite_lo] @ lp.lower[finite_lo])
        dual += float(up_m[finite_hi] @ lp.upper[finite_hi])
        gap = abs(float(res.fun) - dual)
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=np.asarray(res.x),
        objective_value=float(res.fun) + lp.objective_constant,
        dual_gap=gap,
        iterations=int(getattr(res, "nit", 0)),
        method="highs",
    )


def solve(
    lp: LinearProgram,
    method: str = "auto",
    max_iters: int = DEFAULT_MAX_ITERS,
    feas_tol: float = FEAS_TOL,
) -> LpSolution:
    """Solve the LP; Infeasible/Unbounded are statuses, not exceptions.

    ``method``: "bland" (reference two-phase simplex), "highs" (scipy
    backend) or "auto" (kernel up to desk scale, HiGHS beyond).
    """
    if method == "auto":
        cells = (lp.n_rows + lp.n_vars) * lp.n_vars
        method = "bland" if cells <= _AUTO_KERNEL_CELLS else "highs"
    if method == "bland":
        return _solve_simplex(lp, max_iters, feas_tol)
    if method == "highs":
        return _solve_highs(lp)
    raise ConfigurationError(f"unknown LP method {method!r}")


# ---------------------------------------------------------------------------
# MPS interchange.
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return repr(float(value))


def export_mps(lp: LinearProgram) -> str:
    """Fixed-column MPS with generated ids and label-preserving comments."""
    rows: list[str] = []
    row_ids = [f"R{i:07d}" for i in range(lp.n_rows)]
    col_ids = [f"X{j:07d}" for j in range(lp.n_vars)]
    eq_n = len(lp.b_eq)
    rows.append(f"NAME          {lp.name}")
    for j, lab in enumerate(lp.labels):
        rows.append(f"* COL {col_ids[j]} {lab}")
    for i, lab in enumerate(list(lp.eq_labels) + list(lp.ub_labels)):
        rows.append(f"* ROW {row_ids[i]} {lab}")
    rows.append("ROWS")
    rows.append(" N  OBJ")
    for i in range(lp.n_rows):
        rows.append(f" {'E' if i < eq_n else 'L'}  {row_ids[i]}")
    rows.append("COLUMNS")
    a_eq, a_ub = lp.eq_dense(), lp.ub_dense()
    for j in range(lp.n_vars):
        entries: list[tuple[str, float]] = []
        if lp.objective[j] != 0.0:
            entries.append(("OBJ", lp.objective[j]))
        for i in range(eq_n):
            if a_eq[i, j] != 0.0:
                entries.append((row_ids[i], a_eq[i, j]))
        for i in range(len(lp.b_ub)):
            if a_ub[i, j] != 0.0:
                entries.append((row_ids[eq_n + i], a_ub[i, j]))
        for rid, val in entries:
            rows.append(f"    {col_ids[j]:<10}{rid:<10}{_fmt(val)}")
    rows.append("RHS")
    if lp.objective_constant != 0.0:
        rows.append(f"    RHS       OBJ       {_fmt(-lp.objective_constant)}")
    for i in range(eq_n):
        if lp.b_eq[i] != 0.0:
            rows.append(f"    RHS       {row_ids[i]:<10}{_fmt(lp.b_eq[i])}")
    for i in range(len(lp.b_ub)):
        if lp.b_ub[i] != 0.0:
            rows.append(f"    RHS       {row_ids[eq_n + i]:<10}{_fmt(lp.b_ub[i])}")
    rows.append("BOUNDS")
    for j in range(lp.n_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        cid = col_ids[j]
        if lo == 0.0 and np.isposinf(hi):
            continue
        if np.isneginf(lo) and np.isposinf(hi):
            rows.append(f" FR BND       {cid}")
            continue
        if np.isneginf(lo):
            rows.append(f" MI BND       {cid}")
        elif lo != 0.0 or hi < 0.0:
            # Explicit LO also when hi < 0: a bare negative UP would flip the
            # implied lower bound to -inf in classic MPS readers.
            rows.append(f" LO BND       {cid:<10}{_fmt(lo)}")
        if np.isfinite(hi):
            rows.append(f" UP BND       {cid:<10}{_fmt(hi)}")
    rows.append("ENDATA")
    return "\n".join(rows) + "\n"


def parse_mps(text: str) -> LinearProgram:
    """Parse MPS text produced by :func:`export_mps` (plus E/L/G rows)."""
    name = "LP"
    col_names: dict[str, str] = {}
    row_names: dict[str, str] = {}
    section = None
    row_kinds: dict[str, str] = {}
    row_order: list[str] = []
    col_order: list[str] = []
    col_entries: dict[str, list[tuple[str, float]]] = {}
    rhs: dict[str, float] = {}
    bounds: dict[str, list[float]] = {}
    obj_constant = 0.0

    for raw in text.splitlines():
        if not raw.strip():
            continue
        if raw.startswith("*"):
            parts = raw.split()
            if len(parts) >= 4 and parts[1] == "COL":
                col_names[parts[2]] = " ".join(parts[3:])
            elif len(parts) >= 4 and parts[1] == "ROW":
                row_names[parts[2]] = " ".join(parts[3:])
            continue
        if raw.startswith("NAME"):
            name = raw[4:].strip() or "LP"
            continue
        token = raw.strip()
        if token in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES", "ENDATA"):
            section = token
            continue
        parts = raw.split()
        if section == "ROWS":
            kind, rid = parts[0].upper(), parts[1]
            if kind == "N":
                continue
            row_kinds[rid] = kind
            row_order.append(rid)
        elif section == "COLUMNS":
            cid = parts[0]
            if cid not in col_entries:
                col_entries[cid] = []
                col_order.append(cid)
            for rid, val in zip(parts[1::2], parts[2::2]):
                col_entries[cid].append((rid, float(val)))
        elif section == "RHS":
            for rid, val in zip(parts[1::2], parts[2::2]):
                if rid == "OBJ":
                    obj_constant = -float(val)
                else:
                    rhs[rid] = float(val)
        elif section == "BOUNDS":
            btype, cid = parts[0].upper(), parts[2]
            bounds.setdefault(cid, [0.0, np.inf])
            if btype == "FR":
                bounds[cid] = [-np.inf, np.inf]
            elif btype == "MI":
                bounds[cid][0] = -np.inf
            elif btype == "LO":
                bounds[cid][0] = float(parts[3])
            elif btype == "UP":
                bounds[cid][1] = float(parts[3])
            elif btype == "FX":
                bounds[cid] = [float(parts[3]), float(parts[3])]
            else:
                raise DomainError(f"unsupported bound type {btype}")

    n = len(col_order)
    eq_rows = [r for r in row_order if row_kinds[r] == "E"]
    ub_rows = [r for r in row_order if row_kinds[r] in ("L", "G")]
    eq_idx = {r: i for i, r in enumerate(eq_rows)}
    ub_idx = {r: i for i, r in enumerate(ub_rows)}
    objective = np.zeros(n)
    a_eq = np.zeros((len(eq_rows), n))
    a_ub = np.zeros((len(ub_rows), n))
    for j, cid in enumerate(col_order):
        for rid, val in col_entries[cid]:
            if rid == "OBJ":
                objective[j] = val
            elif rid in eq_idx:
                a_eq[eq_idx[rid], j] = val
            elif row_kinds.get(rid) == "G":
                a_ub[ub_idx[rid], j] = -val
            else:
                a_ub[ub_idx[rid], j] = val
    b_eq = np.array([rhs.get(r, 0.0) for r in eq_rows])
    b_ub = np.array(
        [-rhs.get(r, 0.0) if row_kinds[r] == "G" else rhs.get(r, 0.0) for r in ub_rows]
    )
    lower = np.array([bounds.get(cid, [0.0, np.inf])[0] for cid in col_order])
    upper = np.array([bounds.get(cid, [0.0, np.inf])[1] for cid in col_order])
    return LinearProgram(
        objective=objective,
        a_eq=a_eq,
        b_eq=b_eq,
        a_ub=a_ub,
        b_ub=b_ub,
        lower=lower,
        upper=upper,
        labels=[col_names.get(cid, cid) for cid in col_order],
        eq_labels=[row_names.get(r, r) for r in eq_rows],
        ub_labels=[row_names.get(r, r) for r in ub_rows],
        objective_constant=obj_constant,
        name=name,
    )

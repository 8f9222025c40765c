"""Named checks for the entropy-power inequality, its equivalent forms, its
reverse, and the generalisations (Zamir-Feder, Renyi, sharp Young).

Every check returns a report whose ``gap`` is oriented so that ``gap >= 0``
means the inequality holds, whatever direction it is usually written in.
Identities (change of variable, telescoping, equivalences) are reported with
``kind="identity"``: there the gap is a signed residual that should vanish.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import entropy as ent
from . import gaussian as gs
from . import numerics
from .dist import Distribution1D, DomainError, Gaussian
from .transport import build_transport, jensen_expectation, verify_change_of_variable

GRID_TOL = 1e-5
CLOSED_TOL = 1e-9
IDENTITY_TOL = 1e-5
EQUALITY_PROBE_TOL = 1e-6


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    EQUALITY = "equality"
    VIOLATED_WITHIN_ERR = "violated_within_err"
    VIOLATED = "violated"


def classify(gap: float, err: float, tol: float, kind: str = "inequality") -> Verdict:
    if abs(gap) <= max(err, tol):
        return Verdict.EQUALITY
    if kind == "inequality" and gap > 0:
        return Verdict.HOLDS
    if abs(gap) <= err + tol:
        return Verdict.VIOLATED_WITHIN_ERR
    return Verdict.VIOLATED


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    gap: float
    err: float
    tol: float
    inputs: dict = field(default_factory=dict)
    kind: str = "inequality"
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self) -> Verdict:
        return classify(self.gap, self.err, self.tol, self.kind)

    @property
    def violated(self) -> bool:
        return self.verdict is Verdict.VIOLATED

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "inputs": self.inputs,
                "lhs": self.lhs, "rhs": self.rhs, "gap": self.gap, "err": self.err,
                "tol": self.tol, "verdict": self.verdict.value, "extra": self.extra}


@dataclass(frozen=True)
class ChainReport:
    """Ordered steps whose gaps add up to ``total_gap``."""

    name: str
    steps: tuple[InequalityReport, ...]
    inputs: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def total_gap(self) -> float:
        return math.fsum(s.gap for s in self.steps)

    @property
    def verdict(self) -> Verdict:
        order = list(Verdict)
        worst = max((order.index(s.verdict) for s in self.steps), default=0)
        # steps that hold and steps at equality together still "hold"
        if worst <= order.index(Verdict.EQUALITY):
            if all(s.verdict is Verdict.EQUALITY for s in self.steps):
                return Verdict.EQUALITY
            return Verdict.HOLDS
        return order[worst]

    @property
    def violated(self) -> bool:
        return self.verdict is Verdict.VIOLATED

    def step(self, name: str) -> InequalityReport:
        for s in self.steps:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": "chain", "inputs": self.inputs,
                "total_gap": self.total_gap, "verdict": self.verdict.value,
                "steps": [s.to_dict() for s in self.steps], "extra": self.extra}


def _lam(lam: float) -> float:
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie strictly between 0 and 1, got {lam}")
    return lam


def _echo(**kw) -> dict:
    out = {}
    for k, v in kw.items():
        if isinstance(v, Distribution1D):
            out[k] = v.to_spec()
        elif isinstance(v, (list, tuple)) and v and isinstance(v[0], Distribution1D):
            out[k] = [d.to_spec() for d in v]
        elif isinstance(v, np.ndarray):
            out[k] = v.tolist()
        else:
            out[k] = v
    return out


def _h(d: Distribution1D) -> ent.EntropyValue:
    return ent.diff_entropy(d)


def _power_combo(lam):
    return (math.sqrt(lam), math.sqrt(1.0 - lam))


# ---------------------------------------------------------------- EPI forms

def epi_shannon(X: Distribution1D, Y: Distribution1D, tol: float = GRID_TOL) -> InequalityReport:
    """N(X + Y) >= N(X) + N(Y)."""
    hs = ent.entropy_of_combo((1.0, 1.0), (X, Y))
    hx, hy = _h(X), _h(Y)
    ns = ent.entropy_power_from_nats(hs.nats)
    nx, ny = ent.entropy_power_from_nats(hx.nats), ent.entropy_power_from_nats(hy.nats)
    err = 2 * (ns * hs.err + nx * hx.err + ny * hy.err)
    return InequalityReport("epi_shannon", ns, nx + ny, ns - nx - ny, err, tol, _echo(X=X, Y=Y))


def epi_lieb(X: Distribution1D, Y: Distribution1D, lam: float,
             tol: float = GRID_TOL) -> InequalityReport:
    """h(sqrt(l) X + sqrt(1-l) Y) >= l h(X) + (1-l) h(Y)."""
    lam = _lam(lam)
    hu = ent.entropy_of_combo(_power_combo(lam), (X, Y))
    hx, hy = _h(X), _h(Y)
    rhs = lam * hx.nats + (1 - lam) * hy.nats
    err = hu.err + lam * hx.err + (1 - lam) * hy.err
    return InequalityReport("epi_lieb", hu.nats, rhs, hu.nats - rhs, err, tol,
                            _echo(X=X, Y=Y, lam=lam))


def epi_power_concavity(X: Distribution1D, Y: Distribution1D, lam: float,
                        tol: float = GRID_TOL) -> InequalityReport:
    """N(sqrt(l) X + sqrt(1-l) Y) >= l N(X) + (1-l) N(Y)."""
    lam = _lam(lam)
    hu = ent.entropy_of_combo(_power_combo(lam), (X, Y))
    hx, hy = _h(X), _h(Y)
    nu = ent.entropy_power_from_nats(hu.nats)
    nx, ny = ent.entropy_power_from_nats(hx.nats), ent.entropy_power_from_nats(hy.nats)
    rhs = lam * nx + (1 - lam) * ny
    err = 2 * (nu * hu.err + lam * nx * hx.err + (1 - lam) * ny * hy.err)
    return InequalityReport("epi_power_concavity", nu, rhs, nu - rhs, err, tol,
                            _echo(X=X, Y=Y, lam=lam))


def reverse_epi(X: Distribution1D, Y: Distribution1D, lam: float,
                tol: float = GRID_TOL) -> InequalityReport:
    """h(U | V) <= l h(X) + (1-l) h(Y) for the rotated pair (U, V)."""
    lam = _lam(lam)
    rp = ent.rotated_pair(X, Y, lam)
    hx, hy = _h(X), _h(Y)
    rhs = lam * hx.nats + (1 - lam) * hy.nats
    lhs = rp.hU_given_V.nats
    err = rp.hU_given_V.err + lam * hx.err + (1 - lam) * hy.err
    return InequalityReport("reverse_epi", lhs, rhs, rhs - lhs, err, tol,
                            _echo(X=X, Y=Y, lam=lam))


def deficit_sandwich(X: Distribution1D, Y: Distribution1D, lam: float,
                     tol: float = GRID_TOL) -> ChainReport:
    """0 <= h(U) - l h(X) - (1-l) h(Y) <= I(U; V)."""
    lam = _lam(lam)
    rp = ent.rotated_pair(X, Y, lam)
    hx, hy = _h(X), _h(Y)
    deficit = rp.hU.nats - lam * hx.nats - (1 - lam) * hy.nats
    d_err = rp.hU.err + lam * hx.err + (1 - lam) * hy.err
    mi = rp.mutual_info
    inputs = _echo(X=X, Y=Y, lam=lam)
    steps = (
        InequalityReport("deficit_nonnegative", deficit, 0.0, deficit, d_err, tol, inputs),
        InequalityReport("deficit_below_mutual_info", deficit, mi.nats, mi.nats - deficit,
                         d_err + mi.err, tol, inputs),
    )
    return ChainReport("deficit_sandwich", steps, inputs,
                       {"deficit": deficit, "mutual_info": mi.nats, "mutual_info_err": mi.err})


def reverse_equivalence(X: Distribution1D, Y: Distribution1D, lam: float,
                        tol: float = IDENTITY_TOL, cross_check: bool = False) -> InequalityReport:
    """Reverse-EPI gap against the gap of (1-l) h(X) + l h(Y) <= h(-sqrt(1-l) X + sqrt(l) Y).

    With ``cross_check`` the joint entropy h(U, V) is also integrated on a
    2-D grid and the discrepancy from h(X) + h(Y) is recorded in ``extra``.
    """
    lam = _lam(lam)
    rev = reverse_epi(X, Y, lam)
    rp = ent.rotated_pair(X, Y, lam, cross_check=cross_check)
    hx, hy = _h(X), _h(Y)
    perm = rp.hV.nats - (1 - lam) * hx.nats - lam * hy.nats
    err = rev.err + rp.hV.err + hx.err + hy.err
    extra = {"reverse_gap": rev.gap, "permuted_epi_gap": perm}
    if rp.hUV_2d is not None:
        extra["joint_entropy_2d_discrepancy"] = rp.hUV.nats - rp.hUV_2d.nats
        extra["joint_entropy_2d_err"] = rp.hUV_2d.err
    return InequalityReport("reverse_equivalence", rev.gap, perm, rev.gap - perm, err, tol,
                            _echo(X=X, Y=Y, lam=lam), kind="identity", extra=extra)


# ------------------------------------------------------------- proof chain

def proof_chain(X: Distribution1D, Y: Distribution1D, lam: float,
                tol: float = GRID_TOL, identity_tol: float = IDENTITY_TOL,
                gaussian_tol: float = EQUALITY_PROBE_TOL) -> ChainReport:
    """Step-by-step transport proof of h(sqrt(l) X + sqrt(1-l) Y) >= l h(X) + (1-l) h(Y).

    X = T(X*), Y = U(Y*) with X*, Y* standard Gaussians. The step gaps add up
    to the EPI deficit; the telescoping residual is kept in ``extra``:

    - transport identities, weighted by l and 1-l (should vanish),
    - conditioning: h(U) - [h(X~) + E log(l T' + (1-l) U')] >= 0,
    - Jensen: E log(l T' + (1-l) U') - [l E log T' + (1-l) E log U'] >= 0,
    - Gaussian line: h(X~) - l h(X*) - (1-l) h(Y*) = 0.
    """
    lam = _lam(lam)
    inputs = _echo(X=X, Y=Y, lam=lam)
    std = Gaussian(1.0)
    try:
        tX, tY = build_transport(std, X), build_transport(std, Y)
    except Exception as exc:
        raise RuntimeError(f"proof_chain step 'transport' failed: {exc}") from exc

    steps = []
    for label, t, w in (("X", tX, lam), ("Y", tY, 1 - lam)):
        try:
            cv = verify_change_of_variable(t)
        except Exception as exc:
            raise RuntimeError(f"proof_chain step 'change_of_variable_{label}' failed: {exc}") from exc
        # lhs = w h(target), rhs = w [h(X*) + E log T']
        steps.append(InequalityReport(f"change_of_variable_{label}", w * cv.lhs, w * cv.rhs,
                                      w * (cv.rhs - cv.lhs), w * cv.err, identity_tol, inputs,
                                      kind="identity", extra={"residual": cv.residual}))

    try:
        hu = ent.entropy_of_combo(_power_combo(lam), (X, Y))
        jen = jensen_expectation(tX, tY, lam)
    except Exception as exc:
        raise RuntimeError(f"proof_chain step 'conditioning/jensen' failed: {exc}") from exc
    h_tilde = gs.gaussian_entropy([[lam * std.var + (1 - lam) * std.var]])
    h_star = ent.diff_entropy(std).nats

    steps.append(InequalityReport("conditioning", hu.nats, h_tilde + jen.e_mix,
                                  hu.nats - h_tilde - jen.e_mix, hu.err, tol, inputs))
    steps.append(InequalityReport("jensen", jen.e_mix, float(jen.mix_of_e), float(jen.gap),
                                  1e-12, tol, inputs))
    steps.append(InequalityReport("gaussian_line", h_tilde, h_star, h_tilde - h_star, 0.0,
                                  gaussian_tol, inputs, kind="identity"))

    lieb = epi_lieb(X, Y, lam)
    chain = ChainReport("proof_chain", tuple(steps), inputs)
    chain.extra.update({"epi_lieb_gap": lieb.gap,
                        "telescoping_residual": chain.total_gap - lieb.gap})
    return chain


# ---------------------------------------------------------- equality probe

@dataclass(frozen=True)
class EqualityDiagnostics:
    inputs: dict
    dev_T: float
    dev_U: float
    mean_T: float
    mean_U: float
    epi_gap: float

    @property
    def equality_regime(self) -> bool:
        return (self.dev_T < EQUALITY_PROBE_TOL and self.dev_U < EQUALITY_PROBE_TOL
                and abs(self.epi_gap) < EQUALITY_PROBE_TOL)

    @property
    def verdict(self) -> str:
        return "equality_regime" if self.equality_regime else "not_equality_regime"

    violated = False

    def to_dict(self) -> dict:
        return {"name": "equality_diagnostics", "kind": "diagnostic", "inputs": self.inputs,
                "dev_T": self.dev_T, "dev_U": self.dev_U, "mean_T": self.mean_T,
                "mean_U": self.mean_U, "epi_lieb_gap": self.epi_gap, "verdict": self.verdict}


def equality_diagnostics(X: Distribution1D, Y: Distribution1D, lam: float,
                         probe_halfwidth: float = 5.0, probes: int = 1001) -> EqualityDiagnostics:
    """Equality needs T' and U' constant and equal: probe both on a grid."""
    lam = _lam(lam)
    std = Gaussian(1.0)
    x = np.linspace(-probe_halfwidth, probe_halfwidth, probes)
    dT = build_transport(std, X).derivative(x)
    dU = build_transport(std, Y).derivative(x)
    gap = epi_lieb(X, Y, lam).gap
    return EqualityDiagnostics(_echo(X=X, Y=Y, lam=lam),
                               float(np.max(np.abs(dT - dT.mean()))),
                               float(np.max(np.abs(dU - dU.mean()))),
                               float(dT.mean()), float(dU.mean()), gap)


# ------------------------------------------------------------- Zamir-Feder

def zamir_feder(a, dists: Sequence[Distribution1D], tol: float | None = None) -> InequalityReport:
    """h(A X) >= sum_ij a_ij^2 h(X_j) for A with orthonormal rows.

    A single row runs on grids for any family; several rows are supported for
    Gaussian components only, through exact covariance algebra.
    """
    A = np.atleast_2d(np.asarray(a, dtype=float))
    dists = tuple(dists)
    if A.shape[1] != len(dists):
        raise DomainError(f"A has {A.shape[1]} columns but {len(dists)} distributions given")
    if np.max(np.abs(A @ A.T - np.eye(A.shape[0]))) > 1e-10:
        raise DomainError("rows of A must be orthonormal (unit-norm coefficients for one row)")
    hs = [_h(d) for d in dists]
    rhs = float(np.sum(A ** 2 @ np.array([h.nats for h in hs])))
    rhs_err = float(np.sum(A ** 2 @ np.array([h.err for h in hs])))
    inputs = _echo(A=A, dists=list(dists))
    if A.shape[0] == 1:
        lhs = ent.entropy_of_combo(A[0], dists)
        return InequalityReport("zamir_feder", lhs.nats, rhs, lhs.nats - rhs, lhs.err + rhs_err,
                                GRID_TOL if tol is None else tol, inputs)
    if not all(isinstance(d, Gaussian) for d in dists):
        raise DomainError("multi-row Zamir-Feder is supported for Gaussian components only")
    K = A @ np.diag([d.var for d in dists]) @ A.T
    lhs = gs.gaussian_entropy(K)
    return InequalityReport("zamir_feder", lhs, rhs, lhs - rhs, 0.0,
                            CLOSED_TOL if tol is None else tol, inputs)


# ---------------------------------------------------------- Renyi / Young

def renyi_exponents(lam: float, r: float) -> tuple[float, float]:
    """p, q with 1/p' = l / r' and 1/q' = (1-l) / r'."""
    lam = _lam(lam)
    r = float(r)
    if not r > 0 or r == 1:
        raise DomainError(f"r must be positive and != 1, got {r}")
    rc = ent.conjugate(r)
    p = 1.0 / (1.0 - lam / rc)
    q = 1.0 / (1.0 - (1 - lam) / rc)
    if r > 1 and not (p > 1 and q > 1):
        raise DomainError("constraint 1/p' = l/r' gives p, q outside (1, inf) for r > 1")
    if r < 1 and not (0 < p < 1 and 0 < q < 1):
        raise DomainError("constraint 1/p' = l/r' gives p, q outside (0, 1) for r < 1")
    return p, q


def _renyi_delta(hr, hp, hq, lam):
    return hr - lam * hp - (1 - lam) * hq


def renyi_epi(X: Distribution1D, Y: Distribution1D, lam: float, r: float,
              tol: float = GRID_TOL) -> InequalityReport:
    """h_r(U) - l h_p(X) - (1-l) h_q(Y) is at least its value for i.i.d. unit Gaussians."""
    lam = _lam(lam)
    p, q = renyi_exponents(lam, r)
    U = ent.combo_density(_power_combo(lam), (X, Y))
    hr = ent.renyi_entropy(U, r)
    hp, hq = ent.renyi_entropy(X, p), ent.renyi_entropy(Y, q)
    lhs = _renyi_delta(hr.nats, hp.nats, hq.nats, lam)
    g = Gaussian(1.0)
    rhs = _renyi_delta(ent.renyi_entropy(g, r).nats, ent.renyi_entropy(g, p).nats,
                       ent.renyi_entropy(g, q).nats, lam)
    err = hr.err + lam * hp.err + (1 - lam) * hq.err + abs(ent.conjugate(r)) * U.lost_mass
    return InequalityReport("renyi_epi", lhs, rhs, lhs - rhs, err, tol,
                            _echo(X=X, Y=Y, lam=lam, r=r, p=p, q=q))


def young_constant(p: float) -> float:
    """sqrt(p^(1/p) / |p'|^(1/p'))."""
    pc = ent.conjugate(p)
    return math.sqrt(p ** (1 / p) / abs(pc) ** (1 / pc))


def young_check(X: Distribution1D, Y: Distribution1D, p: float, q: float, r: float,
                tol: float = GRID_TOL) -> InequalityReport:
    """Sharp Young inequality C_r ||f*g||_r <= C_p ||f||_p C_q ||g||_q for
    p, q, r > 1, reversed for 0 < p, q, r < 1."""
    p, q, r = float(p), float(q), float(r)
    if abs(1 / p + 1 / q - 1 - 1 / r) > 1e-10:
        raise DomainError("exponents must satisfy 1/p + 1/q = 1 + 1/r")
    if all(v > 1 for v in (p, q, r)):
        forward = True
    elif all(0 < v < 1 for v in (p, q, r)):
        forward = False
    else:
        raise DomainError("exponents must all exceed 1 or all lie in (0, 1)")

    def sides(f, g):
        fg = numerics.convolve(f, g)
        lhs = young_constant(r) * numerics.lp_norm(fg, r)
        rhs = young_constant(p) * numerics.lp_norm(f, p) * young_constant(q) * numerics.lp_norm(g, q)
        return lhs, rhs

    f, g = ent.common_grids((1.0, 1.0), (X, Y))
    lhs, rhs = sides(f, g)
    # coarse grids for a step-halving error estimate
    fc = numerics.GridDensity.from_values(f.x0, 2 * f.dx, f.values[::2])
    gc = numerics.GridDensity.from_values(g.x0, 2 * g.dx, g.values[::2])
    lc, rc_ = sides(fc, gc)
    gap = rhs - lhs if forward else lhs - rhs
    gap_c = rc_ - lc if forward else lc - rc_
    lost = f.lost_mass + g.lost_mass
    err = abs(gap - gap_c) / 3.0 + lost * max(lhs, rhs) + 1e-12 * max(lhs, rhs)
    return InequalityReport("young_check", lhs, rhs, gap, err, tol,
                            _echo(X=X, Y=Y, p=p, q=q, r=r),
                            extra={"regime": "forward" if forward else "reverse",
                                   "ratio": lhs / rhs})

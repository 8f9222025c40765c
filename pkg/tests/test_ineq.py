import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from epi_lab import Gaussian, Laplace, Logistic
from epi_lab import ineq
from epi_lab.dist import DomainError
from epi_lab.ineq import Verdict

from conftest import FAMILIES

G1, G4 = Gaussian(1.0), Gaussian(4.0)
LAP = Laplace(1.0)
HALF_LOG_125 = 0.5 * math.log(1.25)

# grid-engine regression values (n = 2**14, 12 sigma)
LAPLACE_SHANNON_GAP = 0.3517720832
LAPLACE_LIEB_GAP_HALF = 0.0483989333
LAPLACE_YOUNG_RATIO = 0.9809435588


# ----------------------------------------------------------------- verdicts

@given(st.floats(-1, 1), st.floats(0, 0.1), st.floats(0, 0.1),
       st.sampled_from(["inequality", "identity"]))
def test_verdict_invariants(gap, err, tol, kind):
    v = ineq.classify(gap, err, tol, kind)
    if v is Verdict.EQUALITY:
        assert abs(gap) <= max(err, tol)
    if v is Verdict.VIOLATED:
        assert abs(gap) > err + tol
        if kind == "inequality":
            assert gap < -(err + tol)
    if v is Verdict.HOLDS:
        assert kind == "inequality" and gap > 0


def test_verdict_examples():
    assert ineq.classify(1e-7, 0.0, 1e-6) is Verdict.EQUALITY
    assert ineq.classify(0.1, 1e-3, 1e-6) is Verdict.HOLDS
    assert ineq.classify(-1.5e-6, 1e-6, 1e-6) is Verdict.VIOLATED_WITHIN_ERR
    assert ineq.classify(-1e-3, 1e-6, 1e-6) is Verdict.VIOLATED
    assert ineq.classify(1e-3, 1e-6, 1e-6, kind="identity") is Verdict.VIOLATED


def test_chain_total_and_verdict():
    steps = (ineq.InequalityReport("a", 0, 0, 0.2, 0, 1e-6),
             ineq.InequalityReport("b", 0, 0, 0.0, 0, 1e-6))
    c = ineq.ChainReport("c", steps)
    assert c.total_gap == pytest.approx(0.2)
    assert c.verdict is Verdict.HOLDS
    bad = ineq.ChainReport("c", steps + (ineq.InequalityReport("z", 0, 0, -1.0, 0, 1e-6),))
    assert bad.verdict is Verdict.VIOLATED and bad.violated
    assert c.step("b").verdict is Verdict.EQUALITY
    with pytest.raises(KeyError):
        c.step("nope")


# --------------------------------------------------------------- EPI forms

def test_epi_shannon_examples():
    r = ineq.epi_shannon(G1, G4)
    assert r.gap == pytest.approx(0.0, abs=1e-5)
    r = ineq.epi_shannon(LAP, LAP)
    assert r.rhs == pytest.approx(4 * math.e / math.pi, abs=1e-7)
    assert r.gap > 0 and r.verdict is Verdict.HOLDS
    assert r.gap == pytest.approx(LAPLACE_SHANNON_GAP, abs=1e-8)


@pytest.mark.parametrize("a", [0.5, 2.0])
def test_epi_shannon_scaling(a):
    base = ineq.epi_shannon(LAP, Logistic(1.0))
    scaled = ineq.epi_shannon(LAP.scaled(a), Logistic(1.0).scaled(a))
    for k in ("lhs", "rhs", "gap"):
        assert getattr(scaled, k) == pytest.approx(a * a * getattr(base, k), rel=1e-4)


def test_epi_lieb_examples():
    assert ineq.epi_lieb(G1, G1, 0.3).verdict is Verdict.EQUALITY
    assert abs(ineq.epi_lieb(G1, G1, 0.3).gap) < 1e-6
    assert ineq.epi_lieb(G1, G4, 0.5).gap == pytest.approx(HALF_LOG_125, abs=1e-6)
    r = ineq.epi_lieb(LAP, LAP, 0.5)
    assert r.verdict is Verdict.HOLDS
    assert r.gap == pytest.approx(LAPLACE_LIEB_GAP_HALF, abs=1e-8)


def test_epi_power_concavity_examples():
    assert ineq.epi_power_concavity(G1, G1, 0.4).verdict is Verdict.EQUALITY
    r = ineq.epi_power_concavity(G1, G4, 0.5)
    assert r.lhs == pytest.approx(2.5, abs=1e-6) and r.rhs == pytest.approx(2.5, abs=1e-12)
    assert r.verdict is Verdict.EQUALITY
    assert ineq.epi_power_concavity(LAP, LAP, 0.5).gap > 0


def test_reverse_epi_examples():
    assert abs(ineq.reverse_epi(G1, G1, 0.6).gap) < 1e-6
    r = ineq.reverse_epi(G1, G4, 0.5)
    assert r.lhs == pytest.approx(0.5 * math.log(2 * math.pi * math.e * 1.6), abs=1e-6)
    assert r.rhs == pytest.approx(0.5 * math.log(2 * math.pi * math.e * 2), abs=1e-12)
    assert r.gap == pytest.approx(0.1115716, abs=1e-6)
    assert ineq.reverse_epi(LAP, LAP, 0.5).verdict is Verdict.HOLDS


@pytest.mark.parametrize("lam", [0.0, 1.0, 1.5])
def test_lambda_endpoints_rejected(lam):
    with pytest.raises(DomainError):
        ineq.epi_lieb(G1, G1, lam)


def test_deficit_sandwich_examples():
    c = ineq.deficit_sandwich(G1, G1, 0.5)
    assert all(abs(s.gap) < 1e-6 for s in c.steps)
    c = ineq.deficit_sandwich(G1, G4, 0.5)
    assert c.extra["deficit"] == pytest.approx(HALF_LOG_125, abs=1e-6)
    assert c.extra["mutual_info"] == pytest.approx(0.2231436, abs=1e-6)
    for lam in (0.1, 0.3, 0.5, 0.7, 0.9):
        c = ineq.deficit_sandwich(LAP, LAP, lam)
        assert c.verdict is Verdict.HOLDS
        assert c.extra["deficit"] <= c.extra["mutual_info"] + 1e-5


# ------------------------------------------------------------- proof chain

def test_proof_chain_equality_case():
    c = ineq.proof_chain(G1, G1, 0.4)
    assert all(abs(s.gap) < 1e-6 for s in c.steps)
    assert c.verdict is Verdict.EQUALITY


def test_proof_chain_linear_transports():
    c = ineq.proof_chain(G4, G1, 0.5)
    assert c.step("jensen").gap == pytest.approx(math.log(1.5) - 0.5 * math.log(2), abs=1e-9)
    assert c.step("conditioning").gap == pytest.approx(0.0526803, abs=1e-6)
    assert c.total_gap == pytest.approx(HALF_LOG_125, abs=1e-6)


def test_proof_chain_step_names_and_telescoping():
    c = ineq.proof_chain(LAP, FAMILIES["mixture"], 0.3)
    assert [s.name for s in c.steps] == ["change_of_variable_X", "change_of_variable_Y",
                                        "conditioning", "jensen", "gaussian_line"]
    assert all(s.gap >= -1e-6 for s in c.steps)
    assert abs(c.extra["telescoping_residual"]) < 1e-4
    assert c.total_gap == pytest.approx(math.fsum(s.gap for s in c.steps), abs=1e-8)


def test_proof_chain_names_failing_step(monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("no convergence")
    monkeypatch.setattr(ineq, "jensen_expectation", boom)
    with pytest.raises(RuntimeError, match="conditioning/jensen"):
        ineq.proof_chain(LAP, LAP, 0.5)


# ----------------------------------------------------- equality diagnostics

def test_equality_diagnostics():
    assert ineq.equality_diagnostics(G1, G1, 0.5).equality_regime
    d = ineq.equality_diagnostics(G1, G4, 0.5)
    assert not d.equality_regime
    assert d.mean_T == pytest.approx(1.0) and d.mean_U == pytest.approx(2.0)
    assert d.epi_gap > 0
    d = ineq.equality_diagnostics(LAP, LAP, 0.5)
    assert d.dev_T > 1e-2 and not d.equality_regime


# ----------------------------------------------------- reverse equivalence

def test_reverse_equivalence_examples():
    r = ineq.reverse_equivalence(G1, G4, 0.5)
    assert r.extra["reverse_gap"] == pytest.approx(0.1115716, abs=1e-6)
    assert r.extra["permuted_epi_gap"] == pytest.approx(0.1115716, abs=1e-6)
    assert r.verdict is Verdict.EQUALITY
    r = ineq.reverse_equivalence(LAP, Logistic(1.0), 0.5)
    assert abs(r.gap) < 1e-5


def test_reverse_equivalence_relabelling():
    X, Y = LAP, FAMILIES["mixture"]
    a = ineq.reverse_epi(X, Y, 0.3)
    b = ineq.reverse_epi(Y, X, 0.7)
    assert a.gap == pytest.approx(b.gap, abs=1e-9)


def test_reverse_equivalence_cross_check():
    r = ineq.reverse_equivalence(LAP, G1, 0.3, cross_check=True)
    assert abs(r.extra["joint_entropy_2d_discrepancy"]) < 1e-4


# ------------------------------------------------------------ Zamir-Feder

def test_zamir_feder_examples():
    lap3 = [LAP] * 3
    assert ineq.zamir_feder([1.0, 0.0, 0.0], lap3).verdict is Verdict.EQUALITY
    s = 1 / math.sqrt(3)
    assert ineq.zamir_feder([s, s, s], lap3).gap > 0
    A = np.array([[1, 1, 0], [1, -1, 1]]) / np.array([[math.sqrt(2)], [math.sqrt(3)]])
    A[1] -= (A[1] @ A[0]) * A[0]
    A[1] /= np.linalg.norm(A[1])
    r = ineq.zamir_feder(A, [Gaussian(1.0), Gaussian(2.0), Gaussian(5.0)])
    assert r.gap >= 0 and r.tol == ineq.CLOSED_TOL


def test_zamir_feder_rejects():
    with pytest.raises(DomainError, match="orthonormal"):
        ineq.zamir_feder([1.0, 1.0], [LAP, LAP])
    with pytest.raises(DomainError, match="Gaussian"):
        ineq.zamir_feder(np.eye(2), [LAP, LAP])
    with pytest.raises(DomainError):
        ineq.zamir_feder([1.0], [LAP, LAP])


# ------------------------------------------------------------ Renyi, Young

def test_renyi_exponents():
    assert ineq.renyi_exponents(0.5, 2.0) == pytest.approx((4 / 3, 4 / 3))
    p, q = ineq.renyi_exponents(0.3, 0.5)
    assert 0 < p < 1 and 0 < q < 1
    with pytest.raises(DomainError):
        ineq.renyi_exponents(0.5, 1.0)


def test_renyi_epi_examples():
    assert abs(ineq.renyi_epi(G1, G1, 0.5, 2.0).gap) < 1e-5
    assert ineq.renyi_epi(G1, G1, 0.3, 0.7).verdict is Verdict.EQUALITY
    assert ineq.renyi_epi(LAP, LAP, 0.5, 2.0).gap >= 0


@pytest.mark.parametrize("pair", [(G1, G4), (LAP, LAP), (LAP, G1)])
@pytest.mark.parametrize("r", [1.01, 0.99])
def test_renyi_continuity_at_one(pair, r):
    assert ineq.renyi_epi(*pair, 0.5, r).gap == pytest.approx(ineq.epi_lieb(*pair, 0.5).gap, abs=0.02)


def test_young_examples():
    r = ineq.young_check(G1, G1, 4 / 3, 4 / 3, 2.0)
    assert r.extra["ratio"] == pytest.approx(1.0, abs=1e-9)
    assert r.verdict is Verdict.EQUALITY
    r = ineq.young_check(LAP, LAP, 4 / 3, 4 / 3, 2.0)
    assert r.verdict is Verdict.HOLDS
    assert r.extra["ratio"] == pytest.approx(LAPLACE_YOUNG_RATIO, abs=1e-8)
    r = ineq.young_check(G1, G4, 0.8, 0.8, 2 / 3)
    assert r.extra["regime"] == "reverse" and r.gap >= -1e-5


def test_young_trend_towards_one():
    # as p, q, r -> 1 both sides tend to 1 and the gap closes
    gaps = []
    for eps in (0.3, 0.1, 0.01):
        p = 1 + eps
        r = 1 / (2 / p - 1)
        gaps.append(ineq.young_check(LAP, Logistic(1.0), p, p, r).gap)
    assert gaps[0] > gaps[1] > gaps[2] > 0


@pytest.mark.parametrize("pqr", [(2.0, 2.0, 2.0), (4 / 3, 4 / 3, 0.5), (2.0, 0.8, 4 / 3)])
def test_young_rejects_bad_exponents(pqr):
    with pytest.raises(DomainError):
        ineq.young_check(G1, G1, *pqr)


def test_report_serialises():
    d = ineq.epi_lieb(LAP, G1, 0.2).to_dict()
    assert d["verdict"] == "holds" and d["inputs"]["lam"] == 0.2
    assert d["inputs"]["X"] == {"family": "laplace", "b": 1.0}

"""Acceptance criteria, one test per criterion, printed pass/fail lines.

Criterion 3 is known-red: per-string digit frequencies of rotated
Champernowne prefixes cannot meet the stated tolerances at feasible
lengths (the seed itself deviates by 0.021 at 2^18 digits; convergence
is logarithmic).  The test implements the criterion exactly as stated
and fails honestly; the pooled-ensemble counterpart of the same
invariance is checked in criterion 8's suite and passes.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from digitq.digits import (DigitString, block_frequencies, champernowne,
                           degree_of_normality, delete_where, phi_shift,
                           reinsert, value)
from digitq.errors import OffGrid
from digitq.experiments import (SampleGrid, epr_correlation, epr_experiment,
                                index_partition, interference_experiment,
                                make_epr_ensemble, polarization_experiment,
                                seed_invariance_suite, trace_rule_experiment,
                                weak_reduction_experiment)
from digitq.phase import (PAdicRational, apply, chi, extend_to, omega_root,
                          operator_pow, phase_rotate)
from digitq.rng import make_rng
from digitq.states import (BlochPoint, composite, decompose, default_config,
                           hadamard_equiv, qubit_state)

THETA_STAR = 2 * math.acos(1 / math.sqrt(3))


def report(criterion: str, ok: bool, detail: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    print(f"[criterion {criterion}] {verdict} {detail}")


@pytest.fixture(scope="module")
def cfg():
    return default_config()


def test_criterion_01_operator_algebra_exact():
    t0 = time.perf_counter()
    rng = make_rng(101)
    roots = {n: omega_root(2, n) for n in range(0, 9)}
    squared = {n: operator_pow(roots[n], 2) for n in range(1, 9)}
    extended = {n: extend_to(roots[n - 1], 1 << n) for n in range(1, 9)}
    i2 = operator_pow(roots[1], 2)
    i4 = operator_pow(roots[1], 4)
    mismatches = 0
    for _ in range(1000):
        s = DigitString(2, rng.integers(0, 2, size=1 << 12, dtype=np.uint8),
                        _validate=False)
        for n in range(1, 9):
            if apply(squared[n], s) != apply(extended[n], s):
                mismatches += 1
        if apply(i2, s) != phi_shift(s, 1):
            mismatches += 1
        if apply(i4, s) != s:
            mismatches += 1
    # printed 8-tuple: (a1..a8) -> (phi(a8), a7, a5, a6, a1, a2, a3, a4)
    chi3_ok = (chi(3).perm.tolist() == [7, 6, 4, 5, 0, 1, 2, 3]
               and chi(3).shift.tolist() == [1, 0, 0, 0, 0, 0, 0, 0])
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and chi3_ok and elapsed < 10.0
    report("1", ok, f"mismatches={mismatches} chi3={chi3_ok} t={elapsed:.1f}s")
    assert mismatches == 0
    assert chi3_ok
    assert elapsed < 10.0


def test_criterion_02_base3_algebra_exact():
    rng = make_rng(202)
    ok = operator_pow(omega_root(3, 0), 3).is_identity()
    cubed = operator_pow(omega_root(3, 1), 3)
    ok &= cubed.perm.tolist() == [0, 1, 2] and cubed.shift.tolist() == [1, 1, 1]
    # printed forms on symbolic digits
    s3 = DigitString(3, [0, 1, 2])
    ok &= apply(omega_root(3, 1), s3).digits.tolist() == [0, 0, 1]
    s9 = DigitString(3, [0, 1, 2, 0, 1, 2, 0, 1, 2])
    ok &= apply(omega_root(3, 2), s9).digits.tolist() == [0, 0, 1, 0, 1, 2, 0, 1, 2]
    mismatches = 0
    for _ in range(200):
        s = DigitString(3, rng.integers(0, 3, size=3 ** 6, dtype=np.uint8),
                        _validate=False)
        for n in range(1, 6):
            lhs = apply(operator_pow(omega_root(3, n), 3), s)
            rhs = apply(extend_to(omega_root(3, n - 1), 3 ** n), s)
            if lhs != rhs:
                mismatches += 1
    report("2", ok and mismatches == 0, f"mismatches={mismatches}")
    assert ok and mismatches == 0


def test_criterion_03_normality_preservation():
    # as stated: 100 random dyadic rotations (depth <= 10) of the
    # 2^18-digit seed; per-string single-digit frequencies within 0.01 of
    # 1/2 and 2-block frequencies within 0.02 of 1/4
    seed = champernowne(2, 1 << 18)
    rng = make_rng(303)
    worst1 = 0.0
    worst2 = 0.0
    for _ in range(100):
        q = PAdicRational(2, int(rng.integers(0, 1 << 10)), 10)
        r = phase_rotate(seed, q)
        worst1 = max(worst1, float(np.abs(degree_of_normality(r) - 0.5).max()))
        t2 = block_frequencies(r, 2)
        dev2 = max(abs(c / t2.total_windows - 0.25) for c in t2.counts.values())
        if len(t2.counts) < 4:
            dev2 = max(dev2, 0.25)
        worst2 = max(worst2, dev2)
    ok = worst1 <= 0.01 and worst2 <= 0.02
    report("3", ok, f"worst single-digit dev={worst1:.4f} (tol 0.01), "
                    f"worst 2-block dev={worst2:.4f} (tol 0.02); "
                    "Champernowne prefixes converge too slowly for these "
                    "tolerances (see decisions ledger)")
    assert worst1 <= 0.01, "per-string single-digit tolerance unattainable at 2^18"
    assert worst2 <= 0.02, "per-string 2-block tolerance unattainable at 2^18"


def test_criterion_04_polarization_lemma(cfg):
    t0 = time.perf_counter()
    grid = SampleGrid(depth=12)
    devs = {}
    for th in (Fraction(1, 6), Fraction(1, 3), Fraction(1, 2),
               Fraction(2, 3), Fraction(5, 6)):
        rep = polarization_experiment(th, grid, cfg)
        devs[str(th)] = rep.statistics[0].deviation
    exact0 = polarization_experiment(Fraction(0), grid, cfg).statistics[0].observed
    exact1 = polarization_experiment(Fraction(1), grid, cfg).statistics[0].observed
    elapsed = time.perf_counter() - t0
    worst = max(devs.values())
    ok = worst <= 0.02 and exact0 == 1.0 and exact1 == 0.0 and elapsed < 60.0
    report("4", ok, f"worst dev={worst:.4f} exact(0)={exact0} exact(pi)={exact1} "
                    f"t={elapsed:.1f}s")
    assert worst <= 0.02
    assert exact0 == 1.0 and exact1 == 0.0
    assert elapsed < 60.0


def test_criterion_05_trace_rule():
    combos = [(THETA_STAR, Fraction(1, 2)),
              (Fraction(1, 2), Fraction(1, 3)),
              (Fraction(1), Fraction(1, 4))]
    worst = 0.0
    for th1, th2 in combos:
        rep = trace_rule_experiment(th1, th2, SampleGrid(depth=7, base=3),
                                    SampleGrid(depth=12),
                                    n_samples=1 << 12, seed=505)
        worst = max(worst, max(s.deviation for s in rep.statistics))
        assert sum(s.observed for s in rep.statistics) == pytest.approx(1.0)
    ok = worst <= 0.03
    report("5", ok, f"worst rho deviation={worst:.4f} (tol 0.03)")
    assert worst <= 0.03


def test_criterion_06_epr_correlation():
    # partition example
    p = index_partition(12)
    parts_ok = (p[1] == [1, 3, 5, 7, 9, 11] and p[2] == [2, 6, 10]
                and p[3] == [4, 12])
    # exact anchors
    exact_neg = epr_correlation(make_epr_ensemble(Fraction(0), 1 << 12))
    exact_pos = epr_correlation(make_epr_ensemble(Fraction(1), 1 << 12))
    worst = 0.0
    for dth in (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(3, 4)):
        rep = epr_experiment(dth, N=1 << 14)
        dev = abs(rep.statistics[0].observed - (-math.cos(math.pi * float(dth))))
        worst = max(worst, dev)
    ok = parts_ok and exact_neg == -1.0 and exact_pos == 1.0 and worst <= 0.03
    report("6", ok, f"partition={parts_ok} anchors=({exact_neg},{exact_pos}) "
                    f"worst dev={worst:.4f}")
    assert parts_ok
    assert exact_neg == -1.0 and exact_pos == 1.0
    assert worst <= 0.03


def test_criterion_07_interference(cfg):
    rep = interference_experiment(SampleGrid(depth=12), cfg)
    by_name = {s.name: s for s in rep.statistics}
    beam_dev = max(by_name["freq[transmitted detection]"].deviation,
                   by_name["freq[reflected detection]"].deviation)
    comp = by_name["complementarity violations"].observed
    blocked = by_name["blocked output leading-1 violations"].observed
    ok = beam_dev <= 0.02 and comp == 0 and blocked == 0
    report("7", ok, f"beam dev={beam_dev:.4f} complementarity viol={comp} "
                    f"blocked viol={blocked}")
    assert beam_dev <= 0.02
    assert comp == 0 and blocked == 0


def test_criterion_08_hadamard_and_global_phase(cfg):
    L = len(cfg.seed_string)
    img1 = hadamard_equiv(DigitString.constant(2, 1, 16), cfg)
    identity_ok = value(cfg.seed_string) + value(img1) == 1 - Fraction(1, 2 ** L)
    suite = seed_invariance_suite(seed=808)
    control = seed_invariance_suite(seed=808, negative_control=True)
    # algebra is seed-independent: group laws on the corrupted seed
    const = DigitString.constant(2, 0, 1 << 12)
    algebra_ok = (apply(operator_pow(omega_root(2, 1), 4), const) == const)
    ok = identity_ok and suite.passed and control.passed and algebra_ok
    report("8", ok, f"value identity={identity_ok} invariance={suite.passed} "
                    f"negative control={control.passed}")
    assert identity_ok
    assert suite.passed
    assert control.passed
    assert algebra_ok


def test_criterion_09_weak_reduction():
    worst = 0.0
    stuck_worst = 0.0
    for th0 in (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)):
        rep = weak_reduction_experiment(th0, ensemble_size=2000, seed=909)
        by_name = {s.name: s for s in rep.statistics}
        worst = max(worst, by_name["freq[north absorption]"].deviation)
        stuck_worst = max(stuck_worst, by_name["freq[non-convergence]"].observed)
    ok = worst <= 0.03 and stuck_worst < 0.01
    report("9", ok, f"worst absorption dev={worst:.4f} (tol 0.03), "
                    f"non-convergence={stuck_worst:.4f}")
    assert worst <= 0.03
    assert stuck_worst < 0.01


def test_criterion_10_counterfactual_contract(cfg):
    # lambda = 2*pi/3 is the fraction 2/3 of pi
    with pytest.raises(OffGrid):
        qubit_state(cfg, BlochPoint(Fraction(1, 2), Fraction(2, 3)))
    rng = make_rng(1010)
    rejected = accepted = 0
    # every grid point accepted
    for num in rng.integers(0, 1 << cfg.n_max, size=200):
        q = PAdicRational(2, int(num), cfg.n_max)
        qubit_state(cfg, BlochPoint(Fraction(1, 2), q))
        accepted += 1
    for _ in range(400):
        den = int(rng.integers(2, 4096))
        num = int(rng.integers(0, den))
        turns = Fraction(num, den)
        d = turns.denominator
        dyadic = d & (d - 1) == 0 and d <= (1 << cfg.n_max)
        try:
            qubit_state(cfg, BlochPoint(Fraction(1, 2), turns * 2))
            accepted += 1
            ok_case = dyadic
        except OffGrid:
            rejected += 1
            ok_case = not dyadic
        assert ok_case, f"grid contract violated at {turns} turns"
    report("10", True, f"accepted={accepted} rejected={rejected}, all correct")


def test_criterion_11_round_trips():
    rng = make_rng(1111)
    # project/reinsert
    for _ in range(10 ** 4):
        base = int(rng.integers(2, 5))
        length = int(rng.integers(2, 40))
        digs = rng.integers(0, base, length)
        j = int(rng.integers(0, base))
        s = DigitString(base, digs)
        mask = s.digits == j
        if mask.all():
            continue
        out, log = delete_where(s, mask)
        assert reinsert(out, log, j) == s
    # composite/decompose over channel subsets
    for _ in range(10 ** 4):
        n = int(rng.integers(1, 5))
        length = int(rng.integers(1, 24))
        qs = [DigitString(2, rng.integers(0, 2, length)) for _ in range(n)]
        assert decompose(composite(qs), n) == qs
    # serialization
    for _ in range(10 ** 4):
        base = int(rng.integers(2, 17))
        length = int(rng.integers(1, 32))
        s = DigitString(base, rng.integers(0, base, length))
        assert DigitString.from_text(s.to_text()) == s
        assert DigitString.from_json_obj(s.to_json_obj()) == s
    report("11", True, "3 x 10^4 round trips exact")

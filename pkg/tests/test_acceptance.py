"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a single ``#N PASS|FAIL ...`` line; the lines are printed
in the terminal summary (and to stdout, visible with ``-s``).
"""
import time

from kahlerstar.enumeration import enumerate_graphs
from kahlerstar.geometry import builtin_chart
from kahlerstar.graphs import automorphism_count
from kahlerstar.verify import (
    DEFAULT_SEED,
    check_associativity,
    check_budding,
    check_circuit_form,
    check_first_order,
    check_fusion_partition,
    check_karabegov,
    check_structure,
    check_wick,
    deformed_chart,
    run_suite,
)

from oracles import brute_force_a2


def _record(log, number, title, passed, detail):
    line = f"#{number} {'PASS' if passed else 'FAIL'} {title}: {detail}"
    log.append(line)
    print(line)
    return passed


def _worst(reports):
    return max(r.max_residual for r in reports)


def test_criterion_01_enumeration(acceptance_log):
    start = time.perf_counter()
    small = [len(enumerate_graphs(2, k)) for k in (0, 1)]
    agree = True
    for k in (2, 3):
        graphs = enumerate_graphs(2, k)
        oracle = brute_force_a2(k)
        agree &= len(graphs) == len(oracle)
        agree &= sorted(automorphism_count(g) for g in graphs) == sorted(oracle.values())
    elapsed = time.perf_counter() - start
    ok = small == [1, 1] and agree and elapsed < 60
    assert _record(acceptance_log, 1, "enumeration", ok,
                   f"|A_2(0)|,|A_2(1)|={small}, brute force agrees={agree}, {elapsed:.1f}s < 60s")


def test_criterion_02_wick(acceptance_log):
    start = time.perf_counter()
    reports = [check_wick(m, 6, tolerance=1e-12) for m in (1, 2)]
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in reports) and elapsed < 60
    assert _record(acceptance_log, 2, "Wick oracle", ok,
                   f"residual {_worst(reports):.2e} <= 1e-12, {elapsed:.1f}s < 60s")


def test_criterion_03_structure(acceptance_log):
    r = check_structure(4)
    assert _record(acceptance_log, 3, "structure over A_2(k<=4)", r.passed,
                   f"{int(r.max_residual)} violations in {sum(r.details['counts'].values())} graphs")


def test_criterion_04_first_order(acceptance_log):
    reports = [check_first_order(builtin_chart(name), 20, tolerance=1e-10)
               for name in ("flat", "fubini-study", "hyperbolic-disc")]
    ok = all(r.passed for r in reports)
    assert _record(acceptance_log, 4, "first order", ok,
                   f"residual {_worst(reports):.2e} <= 1e-10 on 3 charts x 20 pairs")


def test_criterion_05_associativity(acceptance_log):
    start = time.perf_counter()
    charts = [builtin_chart("fubini-study"), builtin_chart("hyperbolic-disc"),
              deformed_chart("hyperbolic-disc", phi0="same")]
    reports = [check_associativity(c, 3, trials=5, points=3, tolerance=1e-8) for c in charts]
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in reports) and elapsed <= 600
    assert _record(acceptance_log, 5, "associativity", ok,
                   f"relative residual {_worst(reports):.2e} <= 1e-8, {elapsed:.1f}s <= 600s")


def test_criterion_06_circuit_form(acceptance_log):
    reports = [check_circuit_form(m, 2, tolerance=1e-10) for m in (1, 2)]
    ok = all(r.passed for r in reports)
    assert _record(acceptance_log, 6, "automorphism form equals circuit form", ok,
                   f"residual {_worst(reports):.2e} <= 1e-10 for m in (1, 2), k <= 2")


def test_criterion_07_fusion(acceptance_log):
    r = check_fusion_partition(2, 1, tolerance=1e-10)
    ok = r.passed and not r.details["partition_problems"]
    assert _record(acceptance_log, 7, "fusion partition", ok,
                   f"partition exact={not r.details['partition_problems']}, "
                   f"weighted residual {r.max_residual:.2e} <= 1e-10")


def test_criterion_08_budding(acceptance_log):
    r = check_budding(3, tolerance=1e-8)
    ok = r.passed and not r.details["problems"]
    assert _record(acceptance_log, 8, "budding", ok,
                   f"bijection and |Aut| problems={len(r.details['problems'])}, "
                   f"identity residual {r.max_residual:.2e} <= 1e-8")


def test_criterion_09_karabegov(acceptance_log):
    charts = [builtin_chart("flat"), builtin_chart("flat", 2), builtin_chart("fubini-study"),
              deformed_chart("fubini-study", phi1="same")]
    reports = [check_karabegov(c, 3, tolerance=1e-8) for c in charts]
    ok = all(r.passed for r in reports)
    assert _record(acceptance_log, 9, "Karabegov identity", ok,
                   f"residual {_worst(reports):.2e} <= 1e-8 on {len(charts)} charts")


def test_criterion_10_determinism(acceptance_log):
    first = "\n".join(r.to_json() for r in run_suite("all", DEFAULT_SEED)).encode()
    second = "\n".join(r.to_json() for r in run_suite("all", DEFAULT_SEED)).encode()
    ok = first == second
    assert _record(acceptance_log, 10, "determinism", ok,
                   f"two full runs, {len(first)} bytes each, identical={ok}")

import json
import math

import numpy as np
import pytest

from psumlab.experiments import (
    Thm10Config,
    Thm11Config,
    Thm12Config,
    harmonic,
    run_thm8,
    run_thm10,
    run_thm11,
    run_thm12,
    shifted_family,
    singular_profile,
    tents,
    thm10_basis_value,
    thm10_indices,
    thm10_lambdas,
    thm12_sampling_operator,
    y_star,
)
from psumlab.report import table_csv, table_svg, verify_report
from psumlab.spaces import grid_integrate, grid_nodes, lorentz21_norm


@pytest.fixture(scope="module")
def thm8_report():
    return run_thm8(4, budget=500, table_max=6)


@pytest.fixture(scope="module")
def thm10_ones():
    return run_thm10(Thm10Config(N=6, m=1025, lambda_mode="ones", table_exponents=(4, 5, 6)))


@pytest.fixture(scope="module")
def thm11_report():
    return run_thm11(Thm11Config.from_grid(2, 200, budget=40))


@pytest.fixture(scope="module")
def thm12_report():
    return run_thm12(Thm12Config(n=16, table_ns=(4, 16, 64)))


def all_passed(rep):
    assert rep.failed_checks == [], rep.failed_checks


# ---------------------------------------------------------------- thm8


def test_diagonal_gap_examples(thm8_report):
    all_passed(thm8_report)
    assert thm8_report.quantity("pi1_lower") >= 25 / 12 * (1 - 1e-12)
    assert thm8_report.quantity("pi2_S") == pytest.approx(math.sqrt(1 + 1 / 4 + 1 / 9 + 1 / 16), abs=1e-6)
    assert thm8_report.quantity("pi2_A") < 1.2825
    assert thm8_report.quantity("pi2_A") == pytest.approx(math.sqrt(sum(1 / k**2 for k in range(1, 5))), rel=1e-8)


def test_diagonal_gap_table_widens(thm8_report):
    rows = thm8_report.table["rows"]
    assert [r[0] for r in rows] == list(range(1, 7))
    for N, H, lo, p2s, p2a, gap in rows:
        assert H == pytest.approx(harmonic(N))
        assert lo >= 0.999 * H
        assert p2a <= 1.2825
    assert thm8_report.table["flags"]["gap_ratio"]["strictly_increasing"]


def test_diagonal_gap_rejects_large_N():
    with pytest.raises(ValueError):
        run_thm8(17)


# ---------------------------------------------------------------- thm10


def test_multiplier_config_validation():
    with pytest.raises(ValueError):
        Thm10Config(p=1.0)
    with pytest.raises(ValueError):
        Thm10Config(p=2.5)
    with pytest.raises(ValueError):
        Thm10Config(lambda_mode="other")
    with pytest.raises(ValueError):
        Thm10Config(N=40, m=65)
    with pytest.raises(ValueError):
        Thm10Config(p=1.5, s=7.0)
    assert Thm10Config(p=1.5).r == pytest.approx(6.0)
    assert math.isinf(Thm10Config(p=2.0, s=2.0).r)


def test_multiplier_indices_and_weights():
    idx = thm10_indices(3, "paper_weights")
    assert set(range(-3, 4)) - set(idx.tolist()) == {-2, -1, 0}
    lam = thm10_lambdas(idx, 1.5, "paper_weights")
    assert np.all(lam > 0) and np.all(lam <= 1)
    assert np.array_equal(thm10_indices(3, "ones"), np.arange(-3, 4))


def test_multiplier_ones_examples(thm10_ones):
    all_passed(thm10_ones)
    tol = thm10_ones.quantity("grid_tolerance")
    assert thm10_ones.quantity("basis_image_error") <= tol + 1e-12
    for N, v in thm10_ones.table["rows"]:
        assert v == pytest.approx(math.sqrt(2 * N + 1), rel=1e-12)
    assert thm10_ones.provenance["excluded_indices"] == []


def test_multiplier_weighted_divergence():
    vals = [thm10_basis_value(2**e, 1.5, "paper_weights", 2.0) for e in range(4, 13)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_multiplier_run_documents_exclusions():
    rep = run_thm10(Thm10Config(N=8, m=1025, table_exponents=(4, 5)))
    all_passed(rep)
    assert rep.provenance["excluded_indices"] == [-2, -1, 0]
    assert rep.provenance["fourier_convention"].endswith("exp(-2 pi i k t) dt")
    # T-side chain: formula <= Hoelder bound <= Hausdorff-Young bound
    assert rep.quantity("pi2_hash_f_formula") <= rep.quantity("holder_bound") * (1 + 1e-9)
    assert rep.quantity("holder_bound") <= rep.quantity("hausdorff_young_bound") * (1 + 1e-9)


# ---------------------------------------------------------------- thm11


def test_tent_config():
    assert Thm11Config.from_grid(3, 4096).m == 4105
    assert Thm11Config.from_grid(2, 9).m == 9
    with pytest.raises(ValueError):
        Thm11Config(3, 4096)


def test_tents_geometry():
    N, m = 2, 33
    F = tents(N, m)
    assert F.shape == (m, N * N)
    assert np.all(F.max(axis=0) == 1)
    for k in range(N * N):
        assert grid_integrate(F[:, k]) == pytest.approx(1 / (2 * N * N), abs=1e-15)
    assert np.all((F > 0).sum(axis=1) <= 1)
    g = y_star(N, m, 1)
    assert not np.any(g[:, :N]) and np.any(g[:, N:])


def test_tent_examples(thm11_report):
    all_passed(thm11_report)
    assert thm11_report.quantity("y_star_eps_norm") == pytest.approx(0.5, abs=1e-12)
    assert thm11_report.quantity("y_star_pi_dual_norm") <= 1 / math.sqrt(3) + 1e-9
    lo, hi = thm11_report.quantity("z_lower_ones"), thm11_report.quantity("z_upper_ones")
    assert lo >= 1 / math.sqrt(3) - 1e-3 and hi <= 1 + 1e-9
    # the T#-side estimate stays below the chain through I and J
    assert thm11_report.quantity("hash_side_lower") <= thm11_report.quantity("hash_side_sup_bound")


# ---------------------------------------------------------------- thm12


def test_lorentz_config():
    with pytest.raises(ValueError):
        Thm12Config(n=16, m=512)
    with pytest.raises(ValueError):
        Thm12Config(shift_mode="random")
    assert Thm12Config(n=16).grid == 1024


def test_shifted_family_lorentz_norms():
    n = 16
    E = shifted_family(n, 64 * n, "uniform_shifts")
    target = 2 + math.log(n)
    for e in E:
        assert abs(lorentz21_norm(e) - target) / target < 1e-2
    t = grid_nodes(5)
    assert np.allclose(singular_profile(t, 4), [2, 2, 1 / math.sqrt(0.5), 1 / math.sqrt(0.75), 1])


def test_sampling_functionals_unit_norm():
    G = thm12_sampling_operator(257, 8)
    # a block indicator: |g(f)| = sqrt(a) while its Lorentz norm is 2 sqrt(a)
    f = np.zeros(257)
    f[:33] = 1.0
    assert G[0] @ f <= lorentz21_norm(f) * (1 + 1e-12)
    with pytest.raises(ValueError):
        thm12_sampling_operator(256, 8)


def test_lorentz_examples(thm12_report):
    all_passed(thm12_report)
    assert thm12_report.quantity("lorentz_rel_error") <= 1e-2
    assert thm12_report.quantity("diagonal_identity_error") <= 1e-9
    for mode in ("uniform_shifts", "paper_shifts"):
        for what in ("weak", "strong", "ratio"):
            thm12_report.quantity(f"growth_exponent_{what}_{mode}")


def test_literal_shifts_concentrate_at_zero():
    rep = run_thm12(Thm12Config(n=16, shift_mode="paper_shifts", table_ns=(16, 64)))
    rows = {(r[0], r[1]): r for r in rep.table["rows"]}
    # weak norm of the literal shifts grows much faster than the uniform one
    assert rows[(64, "paper_shifts")][3] > 2 * rows[(64, "uniform_shifts")][3]


# ---------------------------------------------------------------- reports


@pytest.mark.parametrize("name", ["thm8_report", "thm10_ones", "thm11_report", "thm12_report"])
def test_certificates_round_trip(name, request):
    rep = request.getfixturevalue(name)
    d = json.loads(rep.to_json())
    assert all(q["certificate"] for q in d["quantities"])
    results = verify_report(d)
    assert len(results) == len(d["quantities"])
    assert all(ok for _, ok in results), [lab for lab, ok in results if not ok]


def test_reports_deterministic():
    a = run_thm8(3, budget=200, table_max=3).to_json()
    b = run_thm8(3, budget=200, table_max=3).to_json()
    assert a == b
    cfg = Thm11Config.from_grid(2, 50, budget=20)
    assert run_thm11(cfg).to_json() == run_thm11(cfg).to_json()


def test_parallel_sweep_matches_serial():
    a = run_thm12(Thm12Config(n=4, table_ns=(4, 16)), jobs=1).to_json()
    b = run_thm12(Thm12Config(n=4, table_ns=(4, 16)), jobs=2).to_json()
    assert a == b


def test_table_outputs(thm12_report):
    csv = table_csv(thm12_report.table)
    lines = csv.strip().split("\n")
    assert lines[0].startswith("n,shift_mode,m,weak")
    assert len(lines) == 1 + len(thm12_report.table["rows"])
    svg = table_svg(thm12_report.table)
    assert svg.startswith("<svg") and "polyline" in svg


def test_json_floats_rounded(thm8_report):
    d = json.loads(thm8_report.to_json())
    for q in d["quantities"]:
        v = q["value"]
        assert float(f"{v:.12g}") == v

"""End-to-end acceptance gate.

One test per shipped criterion, in order; each prints a single
``[PASS] criterion N`` line with the measured figure and runtime, and
asserts both the stated tolerance and the stated runtime budget.
Alternate routes used for cross-checks (set-membership classification,
the 4-parameter product-state search) are implemented here, inside the
test, so they stay independent of the library internals they check.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import dataclasses
import json
import math
import time

import numpy as np
from scipy.optimize import minimize

from cowitness import (
    ChannelConfig,
    ReceiverConfig,
    RenormalizedTable,
    SourceConfig,
    WitnessBranch,
    WitnessKind,
    WitnessParams,
    classify,
    click_probabilities,
    load_bundled_dataset,
    loss_sweep,
    min_eigenvalue_closed_form,
    min_eigenvalue_numeric,
    region_scan,
    renormalize,
    separable_min_bruteforce,
    separable_min_closed_form,
    simulate,
    witness_expectation,
    x_visibility,
    zz_correlation,
)
from cowitness.cli import main

SQ3 = math.sqrt(3.0)
SPECIAL = WitnessParams(-SQ3 / 2, -SQ3 / 2)


def _pass(label: str, t0: float, detail: str) -> float:
    elapsed = time.perf_counter() - t0
    print(f"[PASS] {label}: {detail} ({elapsed:.2f}s)")
    return elapsed


def _smoothed_sigma(c1: int, c2: int) -> float:
    # add-one smoothing keeps sigma > 0 even when a starved line yields
    # only a handful of conclusive events, all in one detector
    n = c1 + c2
    g = (c1 + 1) / (n + 2)
    return math.sqrt(g * (1.0 - g) / (n + 2))


def _point_sigma(counts, params: WitnessParams) -> float:
    s_a0 = _smoothed_sigma(counts.sent_alpha0.early_only, counts.sent_alpha0.late_only)
    s_0a = _smoothed_sigma(counts.sent_0alpha.early_only, counts.sent_0alpha.late_only)
    s_m = _smoothed_sigma(counts.sent_alphaalpha.m1_only, counts.sent_alphaalpha.m2_only)
    var_zz = s_a0 * s_a0 + s_0a * s_0a
    var_xv = 4.0 * s_m * s_m
    return math.sqrt(params.a**2 * var_zz + params.b**2 * var_xv)


def test_criterion_1_bundled_table_reproduction():
    t0 = time.perf_counter()
    table = load_bundled_dataset().to_table()
    zz = zz_correlation(table)
    vis = x_visibility(table)
    evaluation = witness_expectation(SPECIAL, table)
    assert abs(zz - 0.85386465) < 1e-7
    assert abs(vis - 0.870968) < 1e-7
    assert abs(evaluation.expectation - (-0.4937)) < 1e-3
    assert evaluation.entangled
    elapsed = _pass(
        "criterion 1 (bundled 14 dB table)",
        t0,
        f"zz={zz:.8f} x_vis={vis:.6f} expectation={evaluation.expectation:.7f} entangled={evaluation.entangled}",
    )
    assert elapsed < 1.0


def test_criterion_2_eigenvalue_routes_agree():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240201)
    worst = 0.0
    for _ in range(10_000):
        a, b = map(float, rng.uniform(-3.0, 3.0, size=2))
        p = WitnessParams(a, b)
        worst = max(worst, abs(min_eigenvalue_numeric(p) - min_eigenvalue_closed_form(p)))
    assert worst < 1e-9
    elapsed = _pass(
        "criterion 2 (Jacobi vs closed-form, 10000 points)", t0, f"worst |diff|={worst:.2e}"
    )
    assert elapsed < 5.0


def test_criterion_3_separable_minimum_routes_agree():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240202)
    points = [tuple(map(float, rng.uniform(-2.0, 2.0, size=2))) for _ in range(1000)]
    worst = 0.0
    for a, b in points:
        p = WitnessParams(a, b)
        worst = max(worst, abs(separable_min_bruteforce(p) - separable_min_closed_form(p)))
    assert worst < 1e-5

    # independent 4-parameter product-state search: theta and radius for
    # each side, >= 200 random L-BFGS-B restarts per checked point; it
    # must never undercut the closed form by more than 1e-6 (and must
    # actually find the minimum, or the bound would be vacuous)
    def expectation(v, a, b):
        t1, r1, t2, r2 = v
        return (
            1.0
            + a * (r1 * math.sin(t1)) * (r2 * math.sin(t2))
            + 0.5 * b * (1.0 + r1 * math.cos(t1)) * (r2 * math.cos(t2))
        )

    bounds = [(-math.pi, math.pi), (0.0, 1.0), (-math.pi, math.pi), (0.0, 1.0)]
    subset = points[::40] + [(SPECIAL.a, SPECIAL.b), (0.5, 0.9), (0.9, 0.2)]
    worst_undercut = 0.0
    worst_excess = 0.0
    for a, b in subset:
        closed = separable_min_closed_form(WitnessParams(a, b))
        found = math.inf
        for _ in range(200):
            x0 = [
                rng.uniform(-math.pi, math.pi),
                rng.uniform(0.0, 1.0),
                rng.uniform(-math.pi, math.pi),
                rng.uniform(0.0, 1.0),
            ]
            result = minimize(expectation, x0, args=(a, b), method="L-BFGS-B", bounds=bounds)
            found = min(found, float(result.fun))
        worst_undercut = max(worst_undercut, closed - found)
        worst_excess = max(worst_excess, found - closed)
    assert worst_undercut <= 1e-6
    assert worst_excess <= 1e-6

    elapsed = _pass(
        "criterion 3 (separable minimum, 1000 scans + restarts)",
        t0,
        f"worst route |diff|={worst:.2e} worst search undercut={worst_undercut:.2e}",
    )
    assert elapsed < 60.0


def test_criterion_4_region_sets_match_classifier():
    t0 = time.perf_counter()
    tol = 1e-9

    def direct(a: float, b: float):
        # region definitions written straight from the inequalities,
        # independent of classify() internals
        a_sq = a * a
        if not (1.0 - abs(b) < a_sq - tol):  # indefiniteness: 1 - |b| < a^2
            return (WitnessKind.NOT_A_WITNESS_PSD, None)
        if a_sq <= 0.5 * b * b:  # set I side: floor is 1 - |b|
            margin = 1.0 - abs(b)
            seam_branch = WitnessBranch.I
        else:  # set II side: floor sign is -(4a^4 - 4a^2 + b^2)
            margin = -(4.0 * a_sq * a_sq - 4.0 * a_sq + b * b)
            seam_branch = WitnessBranch.II
        if margin < -tol:
            return (WitnessKind.NOT_A_WITNESS_NEGATIVE_ON_SEPARABLE, None)
        if margin <= tol:
            return (WitnessKind.VALID_WITNESS, WitnessBranch.BOUNDARY)
        return (WitnessKind.VALID_WITNESS, seam_branch)

    rows = region_scan((-2.0, 2.0), (-2.0, 2.0), 401)
    assert len(rows) == 401 * 401
    mismatches = 0
    for a, b, cls in rows:
        kind, branch = direct(a, b)
        if kind is not cls.kind or branch is not cls.branch:
            mismatches += 1
    assert mismatches == 0

    special = classify(SPECIAL)
    assert special.kind is WitnessKind.VALID_WITNESS
    assert special.branch is WitnessBranch.BOUNDARY
    quartic = 4.0 * SPECIAL.a**4 - 4.0 * SPECIAL.a**2 + SPECIAL.b**2
    assert abs(quartic) < 1e-15  # boundary identity to machine precision

    elapsed = _pass(
        "criterion 4 (401x401 set membership vs classifier)",
        t0,
        f"mismatches={mismatches} |4a^4-4a^2+b^2|={abs(quartic):.2e} at the boundary point",
    )
    assert elapsed < 10.0


def test_criterion_5_ideal_limit_recovers_one_minus_sqrt3():
    t0 = time.perf_counter()
    source = SourceConfig(mu=0.05, f=0.1, n_rounds=1_000_000)
    channel = ChannelConfig(loss_db=0.0, visibility=1.0)
    receiver = ReceiverConfig(t_b=0.9, eta_det=1.0, p_dark=0.0)
    counts = simulate(source, channel, receiver, seed=20240205)
    evaluation = witness_expectation(SPECIAL, renormalize(counts))
    target = 1.0 - SQ3
    sigma = _point_sigma(counts, SPECIAL)
    assert abs(evaluation.expectation - target) <= 3.0 * sigma + 1e-12
    assert evaluation.entangled
    elapsed = _pass(
        "criterion 5 (ideal-limit simulation)",
        t0,
        f"expectation={evaluation.expectation:.10f} target={target:.10f} 3sigma={3 * sigma:.2e}",
    )
    assert elapsed < 30.0


def test_criterion_6_mix_toward_uniform_is_affine():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240206)
    uniform = RenormalizedTable.uniform()
    worst = 0.0
    for _ in range(1000):
        table = RenormalizedTable(*(float(x) for x in rng.uniform(0.0, 1.0, size=6)))
        a, b = map(float, rng.uniform(-2.0, 2.0, size=2))
        params = WitnessParams(a, b)
        weight = float(rng.uniform(0.0, 1.0))
        mixed = witness_expectation(params, table.mix(uniform, weight)).expectation
        affine = (1.0 - weight) * witness_expectation(params, table).expectation + weight
        worst = max(worst, abs(mixed - affine))
    assert worst <= 1e-12
    elapsed = _pass(
        "criterion 6 (noise mixing affinity, 1000 tables)", t0, f"worst |diff|={worst:.2e}"
    )
    assert elapsed < 5.0


def test_criterion_7_loss_sweep_shape():
    t0 = time.perf_counter()
    losses = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0]
    seed = 20240207
    source = SourceConfig(n_rounds=1_000_000)
    channel = ChannelConfig()
    receiver = ReceiverConfig()

    expectations = []
    sigmas = []
    for loss in losses:
        point_channel = dataclasses.replace(channel, loss_db=loss)
        counts = simulate(source, point_channel, receiver, seed=seed)
        evaluation = witness_expectation(SPECIAL, renormalize(counts))
        expectations.append(evaluation.expectation)
        sigmas.append(_point_sigma(counts, SPECIAL))

    # the library sweep must reproduce the per-point pipeline exactly
    swept = loss_sweep(losses, SPECIAL, source, channel, receiver, seed=seed)
    assert [e.expectation for _, e in swept] == expectations

    # decisively negative at 0 dB
    assert expectations[0] < -3.0 * sigmas[0]
    # non-decreasing within 3 sigma, point to point
    for i in range(len(losses) - 1):
        gate = 3.0 * math.hypot(sigmas[i], sigmas[i + 1])
        assert expectations[i + 1] >= expectations[i] - gate
    # by 25 dB the reading is no longer decisively negative, and the
    # overall trend is upward
    assert expectations[-1] > -3.0 * sigmas[-1]
    assert expectations[-1] > expectations[0]

    # deterministic cross-check on the exact model curve: the expectation
    # computed from exact click probabilities crosses negative -> positive
    def model_expectation(loss: float) -> float:
        probs = click_probabilities(
            source, dataclasses.replace(channel, loss_db=loss), receiver
        )
        def g(dist):
            total = dist.only_first + dist.only_second
            return dist.only_first / total
        table = RenormalizedTable(
            g(probs.sent_alpha0), 1.0 - g(probs.sent_alpha0),
            g(probs.sent_0alpha), 1.0 - g(probs.sent_0alpha),
            g(probs.sent_alphaalpha), 1.0 - g(probs.sent_alphaalpha),
        )
        return witness_expectation(SPECIAL, table).expectation

    assert model_expectation(losses[0]) < 0.0
    assert model_expectation(losses[-1]) > 0.0

    elapsed = _pass(
        "criterion 7 (loss sweep shape)",
        t0,
        "expectations: " + " ".join(f"{e:+.4f}" for e in expectations),
    )
    assert elapsed < 120.0


def test_criterion_8_simulate_cli_byte_identical(tmp_path, capsys):
    t0 = time.perf_counter()
    config = tmp_path / "link.toml"
    config.write_text(
        "[source]\nn_rounds = 1000000\n\n[channel]\nloss_db = 10.0\n",
        encoding="utf-8",
    )
    payloads = []
    for name, threads in (("r1.json", "1"), ("r2.json", "1"), ("r4.json", "4")):
        out = tmp_path / name
        code = main(
            ["simulate", "--config", str(config), "--seed", "31337",
             "--threads", threads, "--output", str(out)]
        )
        assert code == 0
        payloads.append(out.read_bytes())
    capsys.readouterr()
    assert payloads[0] == payloads[1]
    assert payloads[0] == payloads[2]
    # and the document is valid, with rounds conserved
    doc = json.loads(payloads[0].decode("utf-8"))
    assert sum(sum(group.values()) for group in doc["counts"].values()) == 1_000_000
    elapsed = _pass(
        "criterion 8 (CLI determinism across runs and threads)",
        t0,
        f"{len(payloads[0])}-byte documents identical",
    )
    assert elapsed < 60.0

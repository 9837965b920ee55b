"""End-to-end acceptance checks.

Run under pytest, or directly with ``python tests/test_acceptance.py`` for a
one-line PASS/FAIL summary per criterion.
"""
import math
import sys
import time

import numpy as np
import pytest
import scipy.linalg as sla

from thermosteer import KB_EV
from thermosteer.objects import (I2, PX, PZ, Assemblage, apply_instrument,
                                 compatible_family, extend_with_ancilla, isotropic_state,
                                 map_of_choi, measure_prepare_family, pauli_assemblage,
                                 pauli_xz_family, replacement_channel, unitary_channel,
                                 identity_channel, choi_distance, xz_measure_prepare)
from thermosteer.resource import monotone_audit, random_dao, random_lf1
from thermosteer.sdp import SdpProblem, Status, diamond_norm, solve_sdp
from thermosteer.steering import enumerate_strategies, lhs_feasibility, sr_gamma, sr_gamma_dual
from thermosteer.thermo import (Schedule, davies_map, envelope_evolution, find_t_star,
                                schedule_evolution, t_min, thermalisation_channel)
from thermosteer.work import (certificate_hamiltonians, pauli_example, sr_from_work)

SQRT2 = math.sqrt(2)
T_ROOM = 300.0
NV_DELTA = 1.59976e-7

# reference values quoted for the NV example
NV_KT_DELTA = 4.1357e-9
NV_CLASSICAL = 5.8479e-9
NV_QUANTUM = 8.2714e-9
NV_DIFFERENCE = 2.4235e-9


def _line(name, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok


def _rel(a, b):
    return abs(a - b) / abs(b)


# --------------------------------------------------------------------------
# 1. qubit X/Z robustness


def check_pauli_robustness():
    gamma = I2 / 2
    sigma = apply_instrument(pauli_xz_family(), gamma)
    t0 = time.perf_counter()
    res = sr_gamma(sigma, gamma)
    wit = sr_gamma_dual(sigma, gamma)
    elapsed = time.perf_counter() - t0

    # oracle: the X/Z steering functional reaches 2 on sigma and at most sqrt(2) on LHS
    quantum = sum(np.trace(O @ (sigma.sigma[x, 0] - sigma.sigma[x, 1])).real
                  for x, O in enumerate((PX, PZ)))
    strat = enumerate_strategies(2, 2)
    lhs_bound = max(np.linalg.eigvalsh((-1) ** s[0] * PX + (-1) ** s[1] * PZ)[-1]
                    for s in strat.strategies)
    # oracle: explicit LHS model for the mixture at visibility 1/sqrt(2)
    etas = [(I2 + ((-1) ** s[0] * PX + (-1) ** s[1] * PZ) / SQRT2) / 8 for s in strat.strategies]
    model = np.einsum("ixa,ijk->xajk", strat.D, np.array(etas))
    target = pauli_assemblage(1 / SQRT2).sigma
    model_err = np.max(np.abs(model - target))
    model_psd = min(np.linalg.eigvalsh(e)[0] for e in etas)

    ratio = 2.0 ** res.sr
    gap = abs(res.q_star - wit.value)
    ok = (abs(ratio - SQRT2) <= 1e-5 and abs(1 / wit.value - SQRT2) <= 1e-5 and gap <= 1e-6
          and elapsed < 1.0 and abs(quantum / lhs_bound - SQRT2) <= 1e-12
          and model_err <= 1e-15 and model_psd >= -1e-15)
    return _line("1 pauli robustness", ok,
                 f"2^sr={ratio:.9f} 1/dual={1 / wit.value:.9f} gap={gap:.2e} "
                 f"oracle={quantum:.3f}/{lhs_bound:.6f} lhs_model_err={model_err:.1e} t={elapsed:.3f}s")


# --------------------------------------------------------------------------
# 2. survival time identity


def check_tmin_identity():
    gamma = I2 / 2
    fam = pauli_xz_family()
    sr = sr_gamma(apply_instrument(fam, gamma), gamma).sr
    worst = 0.0
    details = []
    for sched in (Schedule.partial(2.5), Schedule.rational(0.7)):
        tm = t_min(fam, gamma, sched)
        err = abs(float(sched.h(tm)) - 2.0 ** -sr)
        worst = max(worst, err)
        details.append(f"{sched.kind}:|h(t)-2^-sr|={err:.1e}")
    t0 = 2.5
    tm = t_min(fam, gamma, Schedule.partial(t0))
    err = abs(tm / (t0 * math.log(2)) - sr)
    details.append(f"t/(t0 ln2)-sr={err:.1e}")
    return _line("2 t_min identity", worst <= 1e-7 and err <= 1e-7, " ".join(details))


# --------------------------------------------------------------------------
# 3. work bounds for the X/Z example


def _quantum_oracle(d, kT):
    # direct matrix-exponential evaluation of sum_{a,x} tr(sigma) Delta
    total = 0.0
    for O in (PX, PZ):
        for s in (1, -1):
            rho = (I2 + s * O) / 2
            H = s * kT * d * O
            Z = np.trace(sla.expm(-H / kT)).real
            total += 0.5 * (np.trace(H @ rho).real + kT * math.log(Z) - kT * math.log(2))
    return total


def check_work_bounds():
    kT = KB_EV * T_ROOM
    ok = True
    details = []
    for d in (0.1, 0.3, 1.0):
        r = pauli_example(d, T_ROOM)
        e_c = _rel(r["classical_sdp"], r["classical_bound"])
        e_q = _rel(r["quantum_direct"], r["quantum_value"])
        e_o = _rel(_quantum_oracle(d, kT), r["quantum_value"])
        below = r["classical_sdp"] <= r["classical_bound"] * (1 + 1e-9)
        ok &= e_c <= 1e-4 and e_q <= 1e-4 and e_o <= 1e-4 and below
        details.append(f"d={d}: c={e_c:.1e} q={e_q:.1e} oracle={e_o:.1e}")
    return _line("3 work bounds", ok, "; ".join(details))


# --------------------------------------------------------------------------
# 4. NV numbers


def _nv():
    return pauli_example(NV_DELTA, T_ROOM)


def check_nv_kt_delta():
    v = _nv()["kT_delta"]
    return _line("4a NV kT*delta", _rel(v, NV_KT_DELTA) <= 1e-4, f"{v:.6e} vs {NV_KT_DELTA:.4e}")


def check_nv_classical():
    v = _nv()["classical_bound"]
    return _line("4b NV classical", _rel(v, NV_CLASSICAL) <= 1e-4,
                 f"{v:.6e} vs {NV_CLASSICAL:.4e} (rel {_rel(v, NV_CLASSICAL):.1e})")


def check_nv_quantum():
    v = _nv()["quantum_value"]
    return _line("4c NV quantum", _rel(v, NV_QUANTUM) <= 1e-4, f"{v:.6e} vs {NV_QUANTUM:.4e}")


def check_nv_difference():
    r = _nv()
    v = r["quantum_value"] - r["classical_bound"]
    return _line("4d NV difference", _rel(v, NV_DIFFERENCE) <= 1e-4,
                 f"{v:.6e} vs {NV_DIFFERENCE:.4e} (rel {_rel(v, NV_DIFFERENCE):.1e})")


# --------------------------------------------------------------------------
# 5. robustness from work


def random_unbiased_assemblage(rng):
    """Two-setting qubit assemblage with reduced state I/2."""
    sig = np.empty((2, 2, 2, 2), dtype=complex)
    for x in range(2):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        U, _ = np.linalg.qr(g)
        lam = rng.uniform(0, 1, size=2)
        m = U @ np.diag(lam) @ U.conj().T / 2
        sig[x, 0] = m
        sig[x, 1] = I2 / 2 - m
    return Assemblage(sig)


def check_work_closure(n=20, seed=7):
    rng = np.random.default_rng(seed)
    gamma = I2 / 2
    worst, done = 0.0, 0
    while done < n:
        sigma = random_unbiased_assemblage(rng)
        sr = sr_gamma(sigma, gamma).sr
        if sr < 1e-3:
            continue
        cert = certificate_hamiltonians(sigma, gamma, T_ROOM)
        ratio, _ = sr_from_work(sigma, gamma, [cert.hamiltonians], T=T_ROOM)
        worst = max(worst, abs(ratio - 2.0 ** sr) / 2.0 ** sr)
        done += 1
    return _line("5 work closure", worst <= 1e-4, f"{n} assemblages, worst rel err {worst:.1e}")


# --------------------------------------------------------------------------
# 6. monotonicity


def check_monotones(n=200, seed=11):
    rng = np.random.default_rng(seed)
    gamma = I2 / 2
    fam = pauli_xz_family()
    ops = [random_dao(2, 2, gamma, rng) for _ in range(n)]
    filters = [random_lf1(gamma, rng) for _ in range(n)]
    rep = monotone_audit(fam, gamma, Schedule.partial(1.0), ops, filters, tol=1e-6)
    bad = sum(not r.passed for r in rep.rows)
    return _line("6 monotone suites", rep.passed and len(rep.rows) == 2 * n,
                 f"{n} DAOs + {n} LF1 filters, {bad} increases")


# --------------------------------------------------------------------------
# 7. finite-time harness


def _evolved(sigma, ch):
    return Assemblage(np.array([[map_of_choi(ch, sigma.sigma[x, a]) for a in range(2)]
                                for x in range(2)]), validate=False)


def check_t_star(t_max=5.0):
    gamma = I2 / 2
    sigma = pauli_assemblage()
    c = lambda t: math.exp(-t) * (1 + math.cos(10 * t)) / 2  # noqa: E731
    ev = envelope_evolution(gamma, c, label="oscillatory")
    ts = find_t_star(sigma, gamma, ev, t_max, grid=500, tol=1e-6)
    finite = np.isfinite(ts.t_star)
    later = np.linspace(ts.t_star + 1e-3, t_max, 20)
    lhs = all(lhs_feasibility(_evolved(sigma, ev.at(t))) is not None for t in later)

    part = Schedule.partial(1.0)
    ts2 = find_t_star(sigma, gamma, schedule_evolution(gamma, part), t_max, grid=500, tol=1e-6)
    expected = t_min(pauli_xz_family(), gamma, part)
    err = abs(ts2.t_star - expected)
    return _line("7 t_star harness", bool(finite and lhs and err <= 1e-3),
                 f"oscillatory t*={ts.t_star:.6f} lhs_after={lhs}; partial t*={ts2.t_star:.6f} "
                 f"vs t_min={expected:.6f}")


# --------------------------------------------------------------------------
# 8. ancilla workflow


def _xz_on_isotropic(eps):
    fam = extend_with_ancilla(xz_measure_prepare())
    sigma = apply_instrument(fam, isotropic_state(2, eps))
    return sigma, sigma.reduced


def _joint_parent():
    povm = [(I2 + (s * PX + t * PZ) / SQRT2) / 4 for s in (1, -1) for t in (1, -1)]
    mp = measure_prepare_family([povm], I2 / 2)
    return [mp.filters[(l, 0)] for l in range(4)]


def _compatible_control():
    # setting 0 reads the first bit of the parent outcome, setting 1 the second
    post = np.zeros((2, 4, 2))
    for l in range(4):
        post[0, l, l // 2] = 1
        post[1, l, l % 2] = 1
    return compatible_family(_joint_parent(), post, 2, 2)


def check_ancilla_workflow():
    sigma, gamma = _xz_on_isotropic(0.05)
    sr = sr_gamma(sigma, gamma).sr
    steerable = sr > 1e-7
    control = extend_with_ancilla(_compatible_control())
    control_lhs = []
    for eps in (0.05, 0.2, 0.5):
        s = apply_instrument(control, isotropic_state(2, eps))
        control_lhs.append(sr_gamma(s, s.reduced).sr <= 1e-7 and lhs_feasibility(s) is not None)
    lo, hi = 0.05, 0.5  # steerable at lo, LHS at hi
    while hi - lo > 1e-3:
        mid = (lo + hi) / 2
        s, g = _xz_on_isotropic(mid)
        if sr_gamma(s, g).sr > 1e-7:
            lo = mid
        else:
            hi = mid
    eps_star = (lo + hi) / 2
    threshold = 1 - 1 / SQRT2
    ok = steerable and all(control_lhs) and abs(eps_star - threshold) <= 1e-3
    return _line("8 ancilla workflow", ok,
                 f"sr(0.05)={sr:.4f} control_lhs={control_lhs} eps*={eps_star:.5f} vs {threshold:.5f}")


# --------------------------------------------------------------------------
# 9. solver health


def _rand_herm(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + g.conj().T) / 2


def _rand_pd(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return g @ g.conj().T / n + 0.1 * np.eye(n)


def random_feasible_sdp(rng):
    blocks = [int(k) for k in rng.integers(1, 9, size=rng.integers(1, 4))]
    m = int(rng.integers(1, 41))
    X0 = [_rand_pd(rng, n) for n in blocks]
    S0 = [_rand_pd(rng, n) for n in blocks]
    y0 = rng.normal(size=m)
    cons = []
    for _ in range(m):
        A = [_rand_herm(rng, n) for n in blocks]
        cons.append((A, float(sum(np.trace(a @ x).real for a, x in zip(A, X0)))))
    C = [S0[j] + sum(y0[k] * cons[k][0][j] for k in range(m)) for j in range(len(blocks))]
    return SdpProblem(blocks, C, cons)


def _diamond_cases():
    def rot(theta):
        return unitary_channel(np.diag([1, np.exp(1j * theta)]))

    ident = identity_channel(2)
    dep = replacement_channel(I2 / 2)
    cases = []
    for theta in (math.pi / 2, 2 * math.pi / 3, 0.4):
        # unitary oracle: twice the sine of the half-angle
        cases.append((ident.choi - rot(theta).choi, 2 * math.sin(theta / 2)))
    for p in (1.0, 0.3):
        noisy = (1 - p) * ident.choi + p * dep.choi
        cases.append((ident.choi - noisy, 1.5 * p))
    return cases


def check_solver_health(n=100, seed=3):
    rng = np.random.default_rng(seed)
    worst_gap = worst_res = 0.0
    statuses = set()
    for _ in range(n):
        prob = random_feasible_sdp(rng)
        sol = solve_sdp(prob)
        statuses.add(sol.status)
        obj = sum(np.trace(c @ x).real for c, x in zip(prob.C, sol.X))
        worst_gap = max(worst_gap, abs(sol.gap) / (1 + abs(obj)))
        b = np.array([bk for _, bk in prob.constraints])
        Ax = np.array([sum(np.trace(a @ x).real for a, x in zip(A, sol.X)) for A, _ in prob.constraints])
        worst_res = max(worst_res, np.max(np.abs(Ax - b)) / (1 + np.max(np.abs(b))))
    dn_err = max(abs(diamond_norm(J, (2, 2)) - ref) for J, ref in _diamond_cases())
    ok = statuses == {Status.OPTIMAL} and worst_gap <= 1e-7 and worst_res <= 1e-8 and dn_err <= 1e-4
    return _line("9 solver health", ok,
                 f"gap={worst_gap:.1e} residual={worst_res:.1e} diamond_err={dn_err:.1e} "
                 f"statuses={sorted(s.value for s in statuses)}")


# --------------------------------------------------------------------------
# 10. Davies map


def check_davies():
    worst = 0.0
    for p in (0.2, 0.5, 0.83):
        gamma = np.diag([p, 1 - p])
        for G in (0.3, 1.0, 2.5):
            for t in (0.0, 0.4, 1.7, 6.0):
                a = davies_map(p, G, G, t)
                b = thermalisation_channel(gamma, math.exp(-G * t))
                worst = max(worst, choi_distance(a, b))
    return _line("10 Davies consistency", worst <= 1e-10, f"worst Choi distance {worst:.1e}")


CHECKS = [
    check_pauli_robustness,
    check_tmin_identity,
    check_work_bounds,
    check_nv_kt_delta,
    check_nv_classical,
    check_nv_quantum,
    check_nv_difference,
    check_work_closure,
    check_monotones,
    check_t_star,
    check_ancilla_workflow,
    check_solver_health,
    check_davies,
]


@pytest.mark.parametrize("check", CHECKS, ids=[c.__name__[6:] for c in CHECKS])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [c() for c in CHECKS]
    print(f"{sum(results)}/{len(results)} passed")
    sys.exit(0 if all(results) else 1)

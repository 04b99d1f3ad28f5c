"""Self-checks run by ``twistpol check``.

Each check returns ``(passed, detail)``; tolerances match the test suite.
"""

from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from .angular import bessel_j, clebsch_gordan, wigner_small_d
from .beam import Beam, TwistedMode, field_components
from .polarization import (
    alignment,
    alignment_closed_form,
    density_from_amplitudes,
    photon_atom_relations,
)
from .transition import (
    FULL_MASK,
    TRANSVERSE,
    AtomPosition,
    TransitionSpec,
    amplitude_set,
    angular_factor,
    quintiero_ratio,
)

CHECKS: dict[str, Callable[[np.random.Generator], tuple[bool, str]]] = {}


def check(name):
    def deco(fn):
        CHECKS[name] = fn
        return fn
    return deco


def _halves(max_twice):
    return [t / 2 for t in range(max_twice + 1)]


@check("wigner orthogonality (j <= 3)")
def _wigner(rng):
    worst = 0.0
    for tj in range(0, 7):
        j = tj / 2
        ms = [(-tj + 2 * k) / 2 for k in range(tj + 1)]
        th = rng.uniform(0, math.pi)
        d = np.array([[wigner_small_d(j, a, b, th) for b in ms] for a in ms])
        worst = max(worst, np.abs(d @ d.T - np.eye(len(ms))).max())
    return worst < 1e-12, f"max deviation {worst:.2e}"


@check("clebsch-gordan orthonormality (j1, j2 <= 5/2)")
def _cg(rng):
    worst = 0.0
    for tj1 in range(6):
        for tj2 in range(6):
            Js = range(abs(tj1 - tj2), tj1 + tj2 + 1, 2)
            states = [(tJ, tM) for tJ in Js for tM in range(-tJ, tJ + 1, 2)]
            prods = [(a, b) for a in range(-tj1, tj1 + 1, 2) for b in range(-tj2, tj2 + 1, 2)]
            c = np.array([[clebsch_gordan(tj1 / 2, a / 2, tj2 / 2, b / 2, tJ / 2, tM / 2)
                           for a, b in prods] for tJ, tM in states])
            worst = max(worst, np.abs(c @ c.T - np.eye(len(states))).max())
    return worst < 1e-12, f"max deviation {worst:.2e}"


@check("bessel three-term recurrence")
def _bessel(rng):
    worst = 0.0
    for _ in range(200):
        x = rng.uniform(0.1, 50)
        n = int(rng.integers(-6, 7))
        lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x)
        rhs = 2 * n / x * bessel_j(n, x)
        scale = max(abs(lhs), abs(rhs), abs(bessel_j(n - 1, x)), abs(bessel_j(n + 1, x)))
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst < 1e-10, f"max relative deviation {worst:.2e}"


@check("lambda-sum identity (l_f <= 4)")
def _lambda_sum(rng):
    worst = 0.0
    for l_f in range(1, 5):
        for th in rng.uniform(0, math.pi, 25):
            for hel in (-1, 1):
                for m_f in range(-l_f, l_f + 1):
                    lhs = sum(angular_factor(l_f, m_f, lam, th) * wigner_small_d(1, lam, hel, th)
                              for lam in (-1, 0, 1))
                    rhs = clebsch_gordan(l_f - 1, 0, 1, hel, l_f, hel) * wigner_small_d(l_f, m_f, hel, th)
                    worst = max(worst, abs(lhs - rhs))
    return worst < 1e-12, f"max deviation {worst:.2e}"


@check("on-axis selection rule")
def _on_axis(rng):
    bad = 0
    for _ in range(20):
        m_g = int(rng.integers(-3, 4))
        hel = int(rng.choice([-1, 1]))
        l_f = int(rng.integers(1, 4))
        amps = amplitude_set(Beam.single(m_g, hel), TransitionSpec(l_f), AtomPosition(0.0)).amps
        bad += sum(1 for m, v in amps.items() if m != m_g and v != 0)
    return bad == 0, f"{bad} non-zero forbidden amplitudes"


@check("longitudinal/transverse mask additivity")
def _mask(rng):
    beam = Beam.superposition([(-2, 1, 1.0), (3, -1, 0.5 - 0.2j)])
    pos = AtomPosition(rng.uniform(0, 3, 50), rng.uniform(0, 2 * math.pi, 50))
    ok = True
    for l_f in (1, 2, 3):
        full = amplitude_set(beam, TransitionSpec(l_f, FULL_MASK), pos).vector()
        lon = amplitude_set(beam, TransitionSpec(l_f, {0}), pos).vector()
        tra = amplitude_set(beam, TransitionSpec(l_f, TRANSVERSE), pos).vector()
        ok &= bool(np.array_equal(full, lon + tra))
    return ok, "exact" if ok else "mismatch"


@check("closed-form alignment parameters")
def _closed(rng):
    worst = 0.0
    for dim in (3, 5):
        for _ in range(100):
            w = rng.dirichlet(np.ones(dim))
            rho = np.diag(w).astype(complex)
            for K in range(1, dim):
                worst = max(worst, abs(alignment(rho, K) - alignment_closed_form(w, K)))
    return worst < 1e-12, f"max deviation {worst:.2e}"


@check("photon/atom relations (single modes)")
def _relations(rng):
    worst = 0.0
    for _ in range(50):
        beam = Beam.single(int(rng.integers(-3, 4)), int(rng.choice([-1, 1])),
                           float(rng.uniform(0.05, 1.4)))
        rep = photon_atom_relations(beam, AtomPosition(rng.uniform(0.1, 5), rng.uniform(0, 2 * math.pi)))
        worst = max(worst, rep.max_discrepancy)
    return worst < 1e-12, f"max discrepancy {worst:.2e}"


@check("E1 amplitudes equal field at mirrored point (any beam)")
def _mirror(rng):
    beam = Beam.superposition([(-2, 1), (3, -1)])
    pos = AtomPosition(rng.uniform(0.1, 3, 100), rng.uniform(0, 2 * math.pi, 100))
    rep = photon_atom_relations(beam, pos)
    worst = float(np.nanmax(rep.mirror_discrepancy))
    return worst < 1e-12, f"max discrepancy {worst:.2e}"


@check("S->D ratio paraxial limits")
def _ratio(rng):
    t0 = time.perf_counter()
    a = quintiero_ratio(0.001, 0.0, True)
    b = quintiero_ratio(0.001, 0.0, False)
    dt = time.perf_counter() - t0
    ok = abs(a - 3 / math.sqrt(2)) < 1e-3 and abs(b - 1 / math.sqrt(2)) < 1e-3 and dt < 1
    return ok, f"with A_z {a:.6f}, without {b:.6f}"


@check("fivefold symmetry of the (-2,+1)+(3,-1) superposition")
def _fivefold(rng):
    beam = Beam.superposition([(-2, 1), (3, -1)])
    b = rng.uniform(0.05, 3, 200)
    phi = rng.uniform(0, 2 * math.pi, 200)
    worst = 0.0
    for l_f in (1, 2):
        spec = TransitionSpec(l_f)
        r0 = density_from_amplitudes(amplitude_set(beam, spec, AtomPosition(b, phi)))
        r1 = density_from_amplitudes(amplitude_set(beam, spec, AtomPosition(b, phi + 2 * math.pi / 5)))
        for K in range(1, 2 * l_f + 1):
            worst = max(worst, float(np.nanmax(np.abs(alignment(r0, K) - alignment(r1, K)))))
    return worst < 1e-9, f"max deviation {worst:.2e}"


@check("compact field form vs plane-wave quadrature")
def _field(rng):
    from .quadrature import field_by_quadrature
    worst = 0.0
    for _ in range(20):
        mode = TwistedMode(int(rng.integers(-3, 4)), int(rng.choice([-1, 1])),
                           float(rng.uniform(0.05, 1.4)))
        rho, phi = rng.uniform(0, 3), rng.uniform(0, 2 * math.pi)
        direct = field_components(Beam((mode,)), rho, phi).vector()
        quad = field_by_quadrature(mode, rho, phi)
        worst = max(worst, np.abs(direct - quad).max() / np.abs(direct).max())
    return worst < 1e-8, f"max relative deviation {worst:.2e}"


def run_all(seed: int = 2024, out=print) -> bool:
    rng = np.random.default_rng(seed)
    all_ok = True
    for name, fn in CHECKS.items():
        ok, detail = fn(rng)
        all_ok &= ok
        out(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok

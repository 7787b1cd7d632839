"""Where do solutions exist, and how do the norms behind the answer behave?

The verdicts are simple inequalities in (d, alpha). This script prints them
as a small map and then shows the integral that drives the heat verdict:
the L^alpha norm of the heat kernel, computed both in closed form and by the
dyadic quadrature ladder. Past the threshold the ladder keeps growing and is
flagged as divergent.
"""

from levy_spde.greens import GreenFunction
from levy_spde.norms import existence_verdict, heat_norm_closed, lalpha_norm_quadrature

ALPHAS = [0.5, 0.9, 1.3, 1.5, 1.7, 1.9]

print("mild solution exists? (rows: d, columns: alpha)")
for eq in ("heat", "wave"):
    print(f"\n{eq:>8} " + " ".join(f"{a:>5}" for a in ALPHAS))
    for d in range(1, 5):
        row = ["  yes" if existence_verdict(eq, d, a).mild_exists else "   no" for a in ALPHAS]
        print(f"{'d=' + str(d):>8} " + " ".join(row))

print("\npoisson: generalized solution only for d > 4 and alpha > d/(d-2)")
for d in (5, 6, 8):
    ok = [a for a in ALPHAS if existence_verdict("poisson", d, a).generalized_exists]
    print(f"  d={d}: alpha in {ok}")

print("\nheat kernel, int_0^1 int |rho|^alpha: closed form vs ladder")
for d, a in [(1, 1.5), (2, 1.5), (3, 1.5), (3, 1.8), (4, 1.6)]:
    closed = heat_norm_closed(1.0, a, d)
    q = lalpha_norm_quadrature(GreenFunction("heat", d), (1.0,) + (0.0,) * d, a)
    if q.diverged:
        ratios = ", ".join(f"{r:.3f}" for r in q.ratios)
        print(f"  d={d} alpha={a}: diverges (ladder ratios {ratios})")
    else:
        print(f"  d={d} alpha={a}: closed {closed.value:.10f}  ladder {q.value:.10f}")
    print(f"      verdict: {existence_verdict('heat', d, a).explain()}")

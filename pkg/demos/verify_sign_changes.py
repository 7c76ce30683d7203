"""The forward direction: orthogonality forces sign changes.

A function orthogonal to an n-dimensional Chebyshev system on the circle
changes sign at least n + 1 times.  The checker reports the inner products
and, when they vanish, whether the count meets the bound.
"""

from sturmkit.chebyshev import sturm_hurwitz_check, trig_system, verify_chebyshev
from sturmkit.errors import NotOrthogonal
from sturmkit.fncore import parse_expression

for order in (1, 2):
    V = trig_system(order)
    print(f"trig_system({order}) passes the randomized Chebyshev test:",
          verify_chebyshev(V, trials=200).passed)
    for text in ("sin(2*x)", "cos(3*x)", "sin(x)", "sin(5*x)+0.5*cos(4*x)"):
        f = parse_expression(text)
        try:
            rep = sturm_hurwitz_check(f, V)
            print(f"  {text}: {rep.count} sign changes, needs {rep.needed}")
        except NotOrthogonal as exc:
            print(f"  {text}: not orthogonal, largest inner product "
                  f"{max(abs(r) for r in exc.residuals):.3f}")

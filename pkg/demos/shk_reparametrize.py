"""Make a function orthogonal to 1, cos x, sin x by reparametrizing the circle.

The function below is not orthogonal to the first harmonics, but it changes
sign four times.  That is enough: some orientation-preserving circle
diffeomorphism phi makes f o phi orthogonal to all three basis functions,
and f o phi keeps its four sign changes.
"""

import numpy as np

from sturmkit.chebyshev import residual_vector, trig_system
from sturmkit.diffeo import pullback
from sturmkit.fncore import count_sign_changes, parse_expression
from sturmkit.shk import SHKProblem, solve_converse_shk

f = parse_expression("0.9*sin(2*x)+0.4*cos(x)+0.15")
V = trig_system(1)

print("inner products with 1, cos x, sin x before:",
      np.round(residual_vector(f, V), 6))
print("sign changes of f:", count_sign_changes(f).count)

sol = solve_converse_shk(SHKProblem(f, V))
g = pullback(f, sol.phi)
print(f"solved at eps={sol.eps} after {sol.iterations} Newton steps")
print("inner products after:", residual_vector(g, V, V.rule.refined()))
print("sign changes of f o phi:", count_sign_changes(g).count)
print(f"phi is increasing: min slope {sol.phi.min_slope():.2e}")

"""
Where does the direct estimator win?
====================================

Leading-order AMSE of the direct and naive estimators at their own optimal
bandwidths, for a few lifetime models. The naive variance carries an extra
factor 1/(1 - F), so its disadvantage grows in the right tail.
"""

from kernhazard import Gamma, ScaledBeta, Weibull, asymptotics

models = [Gamma(0.5, 100.0), Gamma(10.0, 100.0), Weibull(0.5, 100.0), ScaledBeta(2.0, 5.0, 100.0)]
n = 200

print(f"{'model':34s} {'eps':>5s} {'direct':>10s} {'naive':>10s} {'ratio':>7s}")
for model in models:
    for eps in (0.25, 0.5, 0.9):
        x0 = model.quantile(eps)
        d = asymptotics.least_amse("direct", model, x0, n).amse
        v = asymptotics.least_amse("naive", model, x0, n).amse
        print(f"{str(model):34s} {eps:5.2f} {d:10.3e} {v:10.3e} {v / d:7.2f}")

# For a constant hazard both biases vanish and the ratio is exactly exp(lambda x0).
from kernhazard import Exponential  # noqa: E402

e = Exponential(0.5)
for x0 in (1.0, 3.0):
    r = asymptotics.amse("naive", e, x0, n, 0.2).amse / asymptotics.amse("direct", e, x0, n, 0.2).amse
    print(f"exponential(0.5) at {x0}: AMSE ratio {r:.6f}")

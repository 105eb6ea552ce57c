"""
Expressions as differentiable vector fields
===========================================

The package evaluates plain-text formulas with exact forward-mode
derivatives.  This walk-through parses a few, prints them back, and
compares the automatic gradient with a finite difference.
"""

import numpy as np

from manideg import Environment, FieldHandle, evaluate, gradient, parse, to_source

# parse once, reuse the syntax tree
ast = parse("x*(y^2 + 1) - sin(x*y)", ("x", "y"))
print("parsed:", to_source(ast))

env = Environment.of({"x": 0.7, "y": -1.2})
print("value at (0.7, -1.2):", evaluate(ast, env))

# gradient comes from dual-number evaluation, not symbolic algebra
g = gradient(ast, env)
print("gradient:", g)

# check against a central difference
h = 1e-6
fd = []
for i in range(2):
    vals = list(env.values)
    vals[i] += h
    up = evaluate(ast, Environment(env.names, tuple(vals)))
    vals[i] -= 2 * h
    dn = evaluate(ast, Environment(env.names, tuple(vals)))
    fd.append((up - dn) / (2 * h))
print("finite difference:", fd)
print("max deviation:", max(abs(a - b) for a, b in zip(g, fd)))

# several expressions bundle into a vector field with a Jacobian
field = FieldHandle.from_expressions(("x^3 - y", "x + y^3"), ("x", "y"))
p = np.array([0.5, -0.25])
print("\nfield value:", field(p))
print("field Jacobian:\n", field.jacobian(p))

# domain violations raise instead of returning NaN
bad = parse("log(x)", ("x",))
try:
    evaluate(bad, Environment.of({"x": -1.0}))
except Exception as exc:
    print("\nlog of a negative number:", exc)

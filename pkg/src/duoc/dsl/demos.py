"""Built-in demonstration scripts.

Each script is self-checking: it asserts the headline numbers it is
meant to exhibit, so ``duoc demo <name>`` doubles as a smoke test.
"""

DEMOS = {
    "chsh": """\
# Two copies of the maximally entangled pair, regrouped between the
# parties, reproduce the quantum singlet statistics: the CHSH value at
# the optimal settings is 2*sqrt(2), past the local bound of 2.
run chsh { a0=0, a1=pi/4, b0=pi/8, b1=-pi/8 } as R
assert R.F == 2.8284271247461903 tol 1e-9
# aligned settings stay on the classical boundary
run chsh { a0=0, a1=0, b0=0, b1=0 } as C
assert C.F == 2 tol 1e-9
""",
    "activation": """\
# Every entangled pure pair activates a CHSH violation from two copies.
# The uniform pair reaches 1 + sqrt(2); a lopsided 0.9/0.1 pair still
# clears the local bound of 2.
run activation { coeffs=[0.7071067811865475, 0.7071067811865475], r=0 } as U
assert U.F_simulated == 2.414213562373095 tol 1e-9
assert U.F_closed == 2.414213562373095 tol 1e-9
run activation { coeffs=[0.9486832980505138, 0.31622776601683794], r=0 } as L
assert L.F_simulated == 2.0390473489452283 tol 1e-9
assert L.F_closed == 2.0390473489452283 tol 1e-9
assert L.F_simulated > 2
""",
    "witness": """\
# The two-outcome witness answers "no" with probability at least
# min(p, 1-p) on every separable state, but never on the entangled
# target state it is built around.
system S = composite(d=2, bits=1, antibits=1)
state Psi = entpair(p=0.3, parity=0) on S
measure W = witness(p=0.3, parity=0) on S
run born { state=Psi, measure=W } as B
assert B.p0 == 1 tol 1e-9
run witness { p=0.3, grid=0.01 } as V
assert V.min_p_no == 0.3 tol 1e-9
assert V.bound == 0.3 tol 1e-12
assert V.p_no_entangled <= 1e-12
""",
    "purify": """\
# A classical mixture is the marginal of a pure entangled state on a
# doubled system: entanglement supplies the randomness.
system C = composite(d=2, bits=1, antibits=0)
system S = composite(d=2, bits=1, antibits=1)
state rho = classical(weights=[0.3, 0.7]) on C
state psi = purify(of=rho, parity=[0], tail=[]) on S
measure M = computational() on C
run born { state=psi, marginal=[0], measure=M } as B
assert B.p0 == 0.3 tol 1e-9
assert B.p1 == 0.7 tol 1e-9
""",
    "consistency": """\
# Conditioning valid states on valid effects always produces valid
# states; a deliberately digit-mixing effect breaks every trial.
run conditional { trials=150, d=2, bits=2, antibits=2 } as C
assert C.failures == 0
run conditional { trials=25, d=2, bits=1, antibits=1, corrupt=1 } as X
assert X.failures >= 1
""",
    "span": """\
# Local tomography fails: product states span only 4 dimensions of the
# d=2 pair, while valid states span all 8 real dimensions of the
# parity-preserving operators.
system S = composite(d=2, bits=1, antibits=1)
run span { system=S } as D
assert D.product_span == 4 tol 0
assert D.state_span == 8 tol 0
""",
}

"""Langevin samplers with minibatch and random-batch noise, plus exact checks.

Modules:
    targets    sampling targets and gradient oracles
    samplers   LMC, SGLD, AB-SGLD, CC-SGLD chains
    particles  interacting particle steppers (IPD, RBM, CC-RBM)
    metrics    divergences and bound evaluators
    cltlab     exact one-dimensional checks of the supporting lemmas
    cli        configuration-driven experiment runner
"""

__version__ = "0.1.0"

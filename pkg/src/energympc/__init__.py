"""Energy-regularized model-based planning.

Learns a feedforward dynamics model and an energy estimate of environment
transitions from replay data, then plans actions with cross-entropy-method
model-predictive control whose objective penalizes imagined transitions with
high energy (low familiarity). Includes analytic control environments, a
minimal double-backpropagation autodiff engine, and an experiment harness.
"""

__version__ = "0.1.0"

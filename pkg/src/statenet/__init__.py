"""Binary-state recurrent sequence model with reconstruction-driven learning.

A single weight matrix drives both the state update (forward) and the
reconstruction of the previous input and state (backward); learning nudges
weights toward whatever makes the reconstruction match, no gradients
involved. Submodules: core (model math), encoding (text and datasets),
features (per-sample state features), classifier (ridge readout),
experiment (trial protocol and reports), modelio (file formats), synth
(synthetic corpus), rng (the deterministic PRNG), cli.
"""

__version__ = "0.1.0"

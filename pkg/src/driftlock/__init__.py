"""driftlock: desk-scale simulator and analysis toolkit for tracking a
drifting qubit frequency with Bayesian single-shot estimation and
closed-loop feedback, plus the surrounding noise spectroscopy, coherence
prediction and model-violation statistics."""

__version__ = "0.1.0"

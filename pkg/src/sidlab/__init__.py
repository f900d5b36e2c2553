"""Self-induced decoherence and classical-limit numerical laboratory."""

__version__ = "0.1.0"

"""Lightning-TRNG S-box construction, GA optimization, evaluation and SPN demo."""

__version__ = "0.1.0"

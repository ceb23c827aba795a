"""Order batching with packing effort: evaluation, sampling, surrogate models and solvers."""

__version__ = "0.1.0"

"""Linear internal waves in 2D subcritical channels with flat ends."""

__version__ = "0.1.0"

"""First-passage times of random walks in stable domains of attraction over
moving boundaries."""

__version__ = "0.1.0"

"""ProSplat — Gaussian splatting view enhancement toolkit."""

__version__ = "0.1.0"

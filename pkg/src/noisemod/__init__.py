"""Link-level simulation and analysis of mean-keyed Gaussian noise modulation
with joint energy and information harvesting."""

__version__ = "0.1.0"

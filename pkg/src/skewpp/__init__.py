"""Random skew plane partitions weighted by q^volume: sampling, exact kernels and asymptotics."""

__version__ = "0.1.0"

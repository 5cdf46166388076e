"""Friction-driven multistable vibration energy harvester: model, statics,
stick-slip dynamics, harmonic balance and electrical-output sweeps."""

from fivharvest.model import Params, ParameterError, TaylorCoeffs, taylor_coefficients

__all__ = ["Params", "ParameterError", "TaylorCoeffs", "taylor_coefficients"]
__version__ = "0.1.0"

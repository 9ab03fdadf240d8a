"""Two-class heterogeneous traffic flow: model, Roe solver, integrator and stability tools."""

__version__ = "0.1.0"

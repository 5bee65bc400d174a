"""Mission-aware two-level scheduling of DAG workloads on heterogeneous SoCs."""

__version__ = "0.1.0"
